// Command-line front end: `rmi compare` reports every measure for two label
// files, `rmi count-tables` counts tables for given margins.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rmi/rmi.hpp"

namespace {

constexpr int exit_usage = 1;
constexpr int exit_data = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::uint64_t> parse_margin(const std::string& text, const std::string& what)
{
    std::vector<std::uint64_t> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(item, &used);
        } catch (const std::exception&) {
            throw UsageError(what + ": '" + item + "' is not an integer");
        }
        if (used != item.size())
            throw UsageError(what + ": '" + item + "' is not an integer");
        if (v <= 0)
            throw UsageError(what + ": entries must be positive, got " + item);
        out.push_back(static_cast<std::uint64_t>(v));
    }
    if (out.empty())
        throw UsageError(what + ": empty list");
    return out;
}

std::vector<std::string> split_csv(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

struct CompareArgs {
    std::string file_r;
    std::string file_s;
    std::string base = "bits";
    std::string omega = "auto";
    std::string measures;
    std::string format = "json";
    std::uint64_t budget = rmi::default_exact_budget;
};

struct CountArgs {
    std::string rows;
    std::string cols;
    std::string method = "auto";
    std::string format = "json";
    std::uint64_t budget = rmi::default_exact_budget;
};

int run_compare(const CompareArgs& args)
{
    rmi::ReportOptions options;
    try {
        options.base = rmi::parse_log_base(args.base);
        options.omega = rmi::parse_omega_method(args.omega);
    } catch (const rmi::DataError& e) {
        throw UsageError(e.what());
    }
    options.budget = args.budget;
    options.measures = split_csv(args.measures);
    for (const auto& m : options.measures)
        if (std::find(rmi::measure_names.begin(), rmi::measure_names.end(), m) == rmi::measure_names.end())
            throw UsageError("unknown measure '" + m + "'");

    const auto first = rmi::read_labeling_file(args.file_r);
    const auto second = rmi::read_labeling_file(args.file_s);
    const auto report = rmi::compare(first, second, options);

    if (args.format == "json") {
        std::cout << rmi::to_json(report).dump(2) << "\n";
    } else if (args.format == "tsv") {
        std::cout << rmi::to_tsv(report);
        for (const auto& w : report.warnings)
            std::cerr << "warning: " << w << "\n";
    } else {
        std::cout << rmi::to_pretty(report);
    }
    return 0;
}

int run_count(const CountArgs& args)
{
    const auto rows = parse_margin(args.rows, "--rows");
    const auto cols = parse_margin(args.cols, "--cols");
    rmi::OmegaMethod method;
    try {
        method = rmi::parse_omega_method(args.method);
        rmi::validate_margins(rows, cols);
    } catch (const rmi::DataError& e) {
        throw UsageError(e.what());
    }
    const auto count = rmi::count_tables(rows, cols, method, args.budget);
    const double bits = count.log_value / std::numbers::ln2;
    const std::string exact = count.exact_value ? count.exact_value->str() : "";

    if (args.format == "json") {
        nlohmann::ordered_json j;
        j["rows"] = rows;
        j["cols"] = cols;
        j["method"] = rmi::to_string(count.method);
        j["log_nats"] = count.log_value;
        j["log_bits"] = bits;
        if (count.exact_value)
            j["exact"] = exact;
        else
            j["exact"] = nullptr;
        std::cout << j.dump(2) << "\n";
    } else if (args.format == "tsv") {
        std::cout << "method\tlog_nats\tlog_bits\texact\n"
                  << rmi::to_string(count.method) << "\t" << nlohmann::json(count.log_value).dump() << "\t"
                  << nlohmann::json(bits).dump() << "\t" << exact << "\n";
    } else {
        std::cout << "method:   " << rmi::to_string(count.method) << "\n"
                  << "log nats: " << nlohmann::json(count.log_value).dump() << "\n"
                  << "log bits: " << nlohmann::json(bits).dump() << "\n";
        if (count.exact_value)
            std::cout << "exact:    " << exact << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Compare two labelings of the same objects with the reduced mutual information"};
    app.require_subcommand(1);

    CompareArgs compare;
    auto* cmp = app.add_subcommand("compare", "Report every measure for two label files");
    cmp->add_option("file_r", compare.file_r, "First label file (one label per line)")->required();
    cmp->add_option("file_s", compare.file_s, "Second label file")->required();
    cmp->add_option("--base", compare.base, "Log base of reported values")
        ->check(CLI::IsMember({"bits", "nats"}))
        ->capture_default_str();
    cmp->add_option("--omega", compare.omega, "Table-counting method")
        ->check(CLI::IsMember({"auto", "exact", "bbk", "de"}))
        ->capture_default_str();
    cmp->add_option("--measures", compare.measures, "Comma-separated subset of measures (default all)");
    cmp->add_option("--format", compare.format, "Output format")
        ->check(CLI::IsMember({"json", "tsv", "pretty"}))
        ->capture_default_str();
    cmp->add_option("--budget", compare.budget, "Search budget of the exact table counter")->capture_default_str();

    CountArgs count;
    auto* cnt = app.add_subcommand("count-tables", "Count tables with the given row and column sums");
    cnt->add_option("--rows", count.rows, "Comma-separated row sums")->required();
    cnt->add_option("--cols", count.cols, "Comma-separated column sums")->required();
    cnt->add_option("--method,--omega", count.method, "Counting method")
        ->check(CLI::IsMember({"auto", "exact", "bbk", "de"}))
        ->capture_default_str();
    cnt->add_option("--format", count.format, "Output format")
        ->check(CLI::IsMember({"json", "tsv", "pretty"}))
        ->capture_default_str();
    cnt->add_option("--budget", count.budget, "Search budget of the exact table counter")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : exit_usage;
    }

    try {
        if (*cmp)
            return run_compare(compare);
        return run_count(count);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const rmi::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    }
}

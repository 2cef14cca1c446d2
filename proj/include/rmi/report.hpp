#pragma once

// Aggregates every measure for a pair of labelings into one report and
// renders it as JSON, TSV or an aligned text table. Key order is fixed, so
// identical inputs give byte-identical output.

#include <algorithm>
#include <array>
#include <cstdint>
#include <iomanip>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "rmi/classic_measures.hpp"
#include "rmi/corrected_measures.hpp"
#include "rmi/errors.hpp"
#include "rmi/omega.hpp"
#include "rmi/partitions.hpp"

namespace rmi {

enum class LogBase { Bits, Nats };

constexpr std::string_view to_string(LogBase b) noexcept { return b == LogBase::Bits ? "bits" : "nats"; }

inline LogBase parse_log_base(std::string_view name)
{
    if (name == "bits")
        return LogBase::Bits;
    if (name == "nats")
        return LogBase::Nats;
    throw DataError("unknown log base '" + std::string(name) + "' (expected bits or nats)");
}

/// Report keys in output order.
inline constexpr std::array<std::string_view, 16> measure_names = {
    "entropy_r", "entropy_s", "conditional_entropy_s_given_r", "mutual_information", "nmi", "vi",
    "h1",        "h2",        "h3",                            "h4",                 "rmi_exact", "rmi_stirling",
    "rmi_first_term", "nrmi", "emi",                           "ami",
};

/// Dimensionless measures are not rescaled by the log base.
inline bool is_dimensionless(std::string_view name) { return name == "nmi" || name == "nrmi"; }

struct ReportOptions {
    LogBase base = LogBase::Bits;
    OmegaMethod omega = OmegaMethod::Auto;
    std::uint64_t budget = default_exact_budget;
    /// Subset of measure_names; empty means all.
    std::vector<std::string> measures;
};

struct OmegaSummary {
    double log_value = 0.0; ///< in the report's base
    OmegaMethod method = OmegaMethod::Exact;
    std::optional<std::string> exact;
};

struct MeasureReport {
    std::uint64_t n = 0;
    std::size_t R = 0;
    std::size_t S = 0;
    LogBase base = LogBase::Bits;
    std::vector<std::pair<std::string, double>> measures;
    std::optional<OmegaSummary> omega;
    std::vector<std::string> warnings;
};

inline double convert(double nats, LogBase base) { return base == LogBase::Bits ? nats / std::numbers::ln2 : nats; }

inline MeasureReport compare(const ContingencyTable& t, const ReportOptions& options = {})
{
    std::set<std::string_view> wanted;
    if (options.measures.empty()) {
        wanted.insert(measure_names.begin(), measure_names.end());
    } else {
        for (const auto& m : options.measures) {
            auto it = std::find(measure_names.begin(), measure_names.end(), m);
            if (it == measure_names.end())
                throw DataError("unknown measure '" + m + "'");
            wanted.insert(*it);
        }
    }
    const auto want = [&](std::string_view name) { return wanted.count(name) > 0; };
    const bool needs_omega =
        want("h4") || want("rmi_exact") || want("rmi_stirling") || want("rmi_first_term") || want("nrmi");

    MeasureReport report;
    report.n = t.total();
    report.R = t.rows();
    report.S = t.cols();
    report.base = options.base;

    std::optional<LogCount> omega;
    if (needs_omega) {
        omega = count_tables(t.row_sums(), t.col_sums(), options.omega, options.budget);
        if (options.omega == OmegaMethod::Auto && omega->method != OmegaMethod::Exact)
            report.warnings.push_back("table count is approximate: the " + std::string(to_string(omega->method)) +
                                      " estimate was used in place of an exact count");
        OmegaSummary summary;
        summary.log_value = convert(omega->log_value, options.base);
        summary.method = omega->method;
        if (omega->exact_value)
            summary.exact = omega->exact_value->str();
        report.omega = std::move(summary);
    }

    std::optional<RmiResult> rmi;
    if (omega)
        rmi = reduced_mi(t, *omega);
    std::optional<EncodingLengths> lengths;
    if (omega && want("h4"))
        lengths = encoding_lengths(t, *omega);
    else if (want("h1") || want("h2") || want("h3"))
        lengths = encoding_lengths(t, LogCount{});
    std::optional<AdjustedMi> adjusted;
    if (want("emi") || want("ami"))
        adjusted = adjusted_mi(t, AdjustedMiOptions{options.budget});

    for (auto name : measure_names) {
        if (!want(name))
            continue;
        double value = 0.0;
        if (name == "entropy_r") value = row_entropy(t);
        else if (name == "entropy_s") value = col_entropy(t);
        else if (name == "conditional_entropy_s_given_r") value = conditional_entropy(t);
        else if (name == "mutual_information") value = mutual_information(t);
        else if (name == "nmi") value = normalized_mi(t);
        else if (name == "vi") value = variation_of_information(t);
        else if (name == "h1") value = lengths->h1;
        else if (name == "h2") value = lengths->h2;
        else if (name == "h3") value = lengths->h3;
        else if (name == "h4") value = lengths->h4;
        else if (name == "rmi_exact") value = rmi->m_exact;
        else if (name == "rmi_stirling") value = rmi->m_stirling;
        else if (name == "rmi_first_term") value = rmi->first_term;
        else if (name == "nrmi") value = normalized_rmi(t, *omega, options.omega, options.budget);
        else if (name == "emi") value = adjusted->emi;
        else if (name == "ami") value = adjusted->ami;
        if (!is_dimensionless(name))
            value = convert(value, options.base);
        report.measures.emplace_back(std::string(name), value);
    }
    return report;
}

inline MeasureReport compare(const Labeling& first, const Labeling& second, const ReportOptions& options = {})
{
    return compare(build_contingency(first, second), options);
}

inline nlohmann::ordered_json to_json(const MeasureReport& r)
{
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["R"] = r.R;
    j["S"] = r.S;
    j["base"] = to_string(r.base);
    auto& measures = j["measures"] = nlohmann::ordered_json::object();
    for (const auto& [name, value] : r.measures)
        measures[name] = value;
    if (r.omega) {
        auto& o = j["omega"] = nlohmann::ordered_json::object();
        o["log_value"] = r.omega->log_value;
        o["method"] = to_string(r.omega->method);
        if (r.omega->exact)
            o["exact"] = *r.omega->exact;
    } else {
        j["omega"] = nullptr;
    }
    j["warnings"] = r.warnings;
    return j;
}

namespace detail {

inline std::string format_number(double v)
{
    // Same shortest round-trip form as the JSON output.
    return nlohmann::json(v).dump();
}

} // namespace detail

/// One header row and one data row, so reports for several runs can be
/// concatenated for plotting.
inline std::string to_tsv(const MeasureReport& r)
{
    std::vector<std::pair<std::string, std::string>> cols{
        {"n", std::to_string(r.n)}, {"R", std::to_string(r.R)}, {"S", std::to_string(r.S)},
        {"base", std::string(to_string(r.base))}};
    for (const auto& [name, value] : r.measures)
        cols.emplace_back(name, detail::format_number(value));
    if (r.omega) {
        cols.emplace_back("omega_log", detail::format_number(r.omega->log_value));
        cols.emplace_back("omega_method", std::string(to_string(r.omega->method)));
        cols.emplace_back("omega_exact", r.omega->exact.value_or(""));
    }
    std::string header;
    std::string row;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        header += (i ? "\t" : "") + cols[i].first;
        row += (i ? "\t" : "") + cols[i].second;
    }
    return header + "\n" + row + "\n";
}

inline std::string to_pretty(const MeasureReport& r)
{
    std::ostringstream os;
    os << "n = " << r.n << ", R = " << r.R << ", S = " << r.S << " (values in " << to_string(r.base)
       << " per object)\n";
    std::size_t width = 0;
    for (const auto& m : r.measures)
        width = std::max(width, m.first.size());
    os << std::fixed << std::setprecision(6);
    for (const auto& [name, value] : r.measures)
        os << "  " << std::left << std::setw(static_cast<int>(width)) << name << "  " << std::right
           << std::setw(12) << value << "\n";
    if (r.omega) {
        os << "  omega: log = " << r.omega->log_value << " " << to_string(r.base) << " ("
           << to_string(r.omega->method) << ")";
        if (r.omega->exact)
            os << ", exact = " << *r.omega->exact;
        os << "\n";
    }
    for (const auto& w : r.warnings)
        os << "warning: " << w << "\n";
    return os.str();
}

} // namespace rmi

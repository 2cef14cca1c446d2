// Acceptance suite: one PASS/FAIL line per criterion. Exit status is 0 iff
// every gating criterion passes. With --calibration-dir the measured BBK and
// Diaconis-Efron errors are also written there as TSV files.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rmi/rmi.hpp"
#include "support/oracles.hpp"

namespace {

using Counts = std::vector<std::uint64_t>;
using rmi::BigInt;
using rmi::ContingencyTable;
using rmi::OmegaMethod;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    bool gating;
    std::function<Outcome()> run;
};

std::string join(const Counts& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::string num(double v, int digits = 3)
{
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

BigInt multinomial(const Counts& parts)
{
    BigInt den = 1;
    for (auto p : parts)
        den *= rmi::math::factorial(p);
    return rmi::math::factorial(oracle::total(parts)) / den;
}

ContingencyTable table(const oracle::Matrix& m) { return ContingencyTable::from_rows(m); }

double measure(const rmi::MeasureReport& r, const std::string& name)
{
    for (const auto& [key, v] : r.measures)
        if (key == name)
            return v;
    throw std::logic_error("missing measure " + name);
}

rmi::ReportOptions nats()
{
    rmi::ReportOptions o;
    o.base = rmi::LogBase::Nats;
    return o;
}

/// Margin of n with entries in {1, 2}, in random order.
Counts ones_and_twos(std::mt19937_64& rng, std::uint64_t n)
{
    const auto twos = std::uniform_int_distribution<std::uint64_t>(0, n / 2)(rng);
    Counts m(twos, 2);
    m.insert(m.end(), n - 2 * twos, 1);
    std::shuffle(m.begin(), m.end(), rng);
    return m;
}

std::filesystem::path calibration_dir;

// 1. One-group and all-singleton rows.
Outcome degenerate_exactness()
{
    std::mt19937_64 rng(101);
    double worst = 0.0;
    int cases = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = std::uniform_int_distribution<std::size_t>(2, 200)(rng);
        const int groups = std::uniform_int_distribution<int>(2, static_cast<int>(std::min<std::size_t>(n, 12)))(rng);
        auto s = oracle::random_labels(rng, n, groups);
        s[0] = 0;
        s[1] = 1; // at least two groups
        const std::vector<int> one_group(n, 0);
        std::vector<int> singletons(n);
        std::iota(singletons.begin(), singletons.end(), 0);

        for (auto method : {OmegaMethod::Auto, OmegaMethod::Exact}) {
            const auto a = table(oracle::joint(one_group, s));
            const auto ra = rmi::reduced_mi(a, method);
            worst = std::max({worst, std::abs(rmi::mutual_information(a)), std::abs(ra.m_exact)});

            const auto b = table(oracle::joint(singletons, s));
            const auto rb = rmi::reduced_mi(b, method);
            worst = std::max({worst, std::abs(rmi::mutual_information(b) - rmi::col_entropy(b)), std::abs(rb.m_exact)});
            ++cases;
        }
    }
    return {worst <= 1e-9, std::to_string(cases) + " label pairs (auto and exact counts), n<=200; max deviation " +
                               num(worst) + " nats (tol 1e-9)"};
}

// 2. Exact counts against brute-force enumeration of every margin pair.
Outcome exact_oracle()
{
    std::uint64_t pairs = 0;
    std::uint64_t mismatches = 0;
    std::string first_bad;
    for (std::uint64_t n = 1; n <= 10; ++n)
        for (std::size_t R = 1; R <= 4; ++R)
            for (std::size_t S = 1; S <= 4; ++S)
                for (const auto& rows : oracle::positive_compositions(n, R)) {
                    const auto hist = oracle::column_sum_histogram(rows, S);
                    for (const auto& cols : oracle::positive_compositions(n, S)) {
                        const auto it = hist.find(cols);
                        const std::uint64_t expected = it == hist.end() ? 0 : it->second;
                        const auto got = *rmi::count_exact(rows, cols).exact_value;
                        ++pairs;
                        if (got != expected) {
                            if (mismatches++ == 0)
                                first_bad = " first mismatch rows=" + join(rows) + " cols=" + join(cols);
                        }
                    }
                }
    return {mismatches == 0 && pairs > 0,
            std::to_string(pairs) + " ordered margin pairs, n<=10, R,S<=4; " + std::to_string(mismatches) +
                " mismatches" + first_bad};
}

// 3. Ω(1^n, b) = n!/Π b!.
Outcome multinomial_identity()
{
    std::uint64_t small = 0;
    std::uint64_t enumerated = 0;
    bool ok = true;
    for (std::uint64_t n = 1; n <= 10; ++n) {
        const Counts ones(n, 1);
        for (std::size_t S = 1; S <= n; ++S) {
            std::map<Counts, std::uint64_t> hist;
            if (n <= 7)
                hist = oracle::column_sum_histogram(ones, S);
            for (const auto& b : oracle::positive_compositions(n, S)) {
                const auto got = *rmi::count_exact(ones, b).exact_value;
                ok = ok && got == multinomial(b);
                ++small;
                if (n <= 7) {
                    ok = ok && got == hist[b];
                    ++enumerated;
                }
            }
        }
    }

    std::mt19937_64 rng(303);
    double worst = 0.0;
    int large = 0;
    for (std::uint64_t n : {100u, 1000u, 10000u})
        for (std::size_t S : {2u, 5u, 20u, 100u})
            for (int trial = 0; trial < 5; ++trial) {
                Counts b(S, 1);
                std::uniform_int_distribution<std::size_t> pick(0, S - 1);
                for (std::uint64_t i = S; i < n; ++i)
                    ++b[pick(rng)];
                const Counts ones(n, 1);
                const double truth = rmi::math::log(multinomial(b));
                for (auto method : {OmegaMethod::Auto, OmegaMethod::BBK}) {
                    const double got = rmi::count_tables(ones, b, method).log_value;
                    worst = std::max(worst, std::abs(got - truth) / truth);
                }
                if (n <= 1000 && S <= 5)
                    ok = ok && *rmi::count_exact(ones, b).exact_value == multinomial(b);
                ++large;
            }
    ok = ok && worst <= 1e-9;
    return {ok, std::to_string(small) + " margins n<=10 exact (" + std::to_string(enumerated) +
                    " also enumerated); " + std::to_string(large) + " margins n<=10^4, max relative log error " +
                    num(worst) + " (tol 1e-9)"};
}

// 4. BBK: exact for singleton rows, calibrated on margins with entries in {1, 2}.
Outcome bbk_calibration()
{
    std::mt19937_64 rng(404);
    double worst_ones = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = std::uniform_int_distribution<std::uint64_t>(2, 300)(rng);
        const auto S = std::uniform_int_distribution<std::size_t>(1, std::min<std::uint64_t>(n, 30))(rng);
        Counts b(S, 1);
        std::uniform_int_distribution<std::size_t> pick(0, S - 1);
        for (std::uint64_t i = S; i < n; ++i)
            ++b[pick(rng)];
        const Counts ones(n, 1);
        const double truth = rmi::math::log(multinomial(b));
        const double got = rmi::approx_bbk(ones, b).log_value;
        worst_ones = std::max(worst_ones, std::abs(got - truth) / std::max(1.0, truth));
    }

    std::ofstream tsv;
    if (!calibration_dir.empty()) {
        tsv.open(calibration_dir / "bbk_sparse.tsv");
        tsv << "n\tR\tS\trows\tcols\tlog_exact\tlog_bbk\trel_error\n" << std::setprecision(17);
    }
    std::vector<double> errors;
    for (int trial = 0; trial < 500; ++trial) {
        const auto n = std::uniform_int_distribution<std::uint64_t>(20, 40)(rng);
        const auto rows = ones_and_twos(rng, n);
        const auto cols = ones_and_twos(rng, n);
        const double truth = rmi::count_exact(rows, cols).log_value;
        const double est = rmi::approx_bbk(rows, cols).log_value;
        const double err = std::abs(est - truth) / truth;
        errors.push_back(err);
        if (tsv)
            tsv << n << "\t" << rows.size() << "\t" << cols.size() << "\t" << join(rows) << "\t" << join(cols) << "\t"
                << truth << "\t" << est << "\t" << err << "\n";
    }
    const double worst = *std::max_element(errors.begin(), errors.end());
    const double mean = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
    return {worst_ones <= 1e-12 && worst <= 0.05,
            "singleton rows: max relative log error " + num(worst_ones) + " (tol 1e-12); 500 margins in {1,2}, "
            "n in [20,40]: max " + num(100 * worst) + "%, mean " + num(100 * mean) + "% (tol 5%)"};
}

// 5. Diaconis-Efron on near-uniform 3x3 margins. The corrected estimate is
// compared with the literal reading of the shape parameters, and the
// swapped-sum reading is reported alongside for information.
Outcome de_calibration()
{
    // Offsets from the uniform split q = n/3: the largest entry is at most
    // q + 5 and the smallest at least q - 5.
    const std::vector<std::array<int, 2>> shapes{{0, 0}, {-1, 1}, {-3, 3}, {-5, 5}, {-2, -2}, {4, 0}};
    std::ofstream tsv;
    if (!calibration_dir.empty()) {
        tsv.open(calibration_dir / "de_near_uniform.tsv");
        tsv << "n\trows\tcols\tlog_exact\tlog_de\trel_error\tlog_de_literal\trel_error_literal"
               "\tlog_de_swapped\trel_error_swapped\n"
            << std::setprecision(17);
    }
    struct Stats {
        double worst = 0.0, sum = 0.0;
        void add(double e)
        {
            worst = std::max(worst, e);
            sum += e;
        }
    } fixed_stats, literal_stats, swapped_stats;
    int cases = 0, worse_than_literal = 0, swapped_better = 0;
    const auto margin = [](std::uint64_t n, std::array<int, 2> d) {
        const auto q = static_cast<long long>(n / 3);
        const long long a = q + d[0], b = q + d[1];
        return Counts{static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(b),
                      static_cast<std::uint64_t>(static_cast<long long>(n) - a - b)};
    };
    for (std::uint64_t n = 60; n <= 120; ++n)
        for (std::size_t i = 0; i < shapes.size(); ++i)
            for (std::size_t j = i; j < shapes.size(); ++j) {
                const auto rows = margin(n, shapes[i]);
                const auto cols = margin(n, shapes[j]);
                const double truth = rmi::count_exact(rows, cols).log_value;
                const double fixed = rmi::approx_de(rows, cols, rmi::DEVariant::IndexConsistent).log_value;
                const double literal = rmi::approx_de(rows, cols, rmi::DEVariant::Literal).log_value;
                const double swapped = rmi::approx_de(rows, cols, rmi::DEVariant::SwappedSums).log_value;
                const double e = std::abs(fixed - truth) / truth;
                const double el = std::abs(literal - truth) / truth;
                const double es = std::abs(swapped - truth) / truth;
                fixed_stats.add(e);
                literal_stats.add(el);
                swapped_stats.add(es);
                worse_than_literal += e > el;
                swapped_better += es < e;
                ++cases;
                if (tsv)
                    tsv << n << "\t" << join(rows) << "\t" << join(cols) << "\t" << truth << "\t" << fixed << "\t" << e
                        << "\t" << literal << "\t" << el << "\t" << swapped << "\t" << es << "\n";
            }
    const auto pct = [&](const Stats& s) {
        return "max " + num(100 * s.worst, 4) + "%, mean " + num(100 * s.sum / cases, 4) + "%";
    };
    return {fixed_stats.worst <= 0.10 && worse_than_literal == 0,
            std::to_string(cases) + " margin pairs, n in [60,120]: " + pct(fixed_stats) + " (tol 10%); literal " +
                pct(literal_stats) + ", worse than literal on " + std::to_string(worse_than_literal) +
                "; swapped-sum reading " + pct(swapped_stats) + ", better on " + std::to_string(swapped_better)};
}

// 6. a = b = (2,2).
Outcome identical_two_by_two()
{
    const auto r = rmi::reduced_mi(table({{2, 0}, {0, 2}}));
    const double bits = r.m_exact / std::numbers::ln2;
    return {std::abs(bits - 0.25) <= 1e-12, "m_exact = " + num(bits, 17) + " bits (expected 0.25, tol 1e-12)"};
}

// 7. Property fuzz.
Outcome property_fuzz()
{
    std::mt19937_64 rng(707);
    int accepted = 0, skipped = 0;
    std::vector<std::string> problems;
    const auto note = [&](const std::string& p) {
        if (problems.size() < 3)
            problems.push_back(p);
    };
    while (accepted < 1000) {
        const auto n = std::uniform_int_distribution<std::size_t>(2, 60)(rng);
        const int R = std::uniform_int_distribution<int>(1, 6)(rng);
        const int S = std::uniform_int_distribution<int>(1, 6)(rng);
        const auto m = oracle::joint(oracle::random_labels(rng, n, R), oracle::random_labels(rng, n, S));
        const auto t = table(m);
        rmi::MeasureReport rep;
        try {
            rep = rmi::compare(t, nats());
        } catch (const rmi::UndefinedMeasureError&) {
            ++skipped; // nmi or nrmi undefined for this pair
            continue;
        }
        ++accepted;

        const double I = measure(rep, "mutual_information");
        const double bound = std::min(rmi::row_entropy(t), rmi::col_entropy(t));
        if (I < -1e-9 || I > bound + 1e-9)
            note("I out of range");
        const auto rmi_result = rmi::reduced_mi(t);
        const bool omega_one = rmi_result.log_omega.exact_value && *rmi_result.log_omega.exact_value == 1;
        if (omega_one ? rmi_result.m_exact != rmi_result.first_term : !(rmi_result.m_exact < rmi_result.first_term))
            note("m_exact vs first_term");

        // Relabel: permute rows and columns.
        std::vector<std::size_t> pr(t.rows()), pc(t.cols());
        std::iota(pr.begin(), pr.end(), 0);
        std::iota(pc.begin(), pc.end(), 0);
        std::shuffle(pr.begin(), pr.end(), rng);
        std::shuffle(pc.begin(), pc.end(), rng);
        oracle::Matrix permuted(t.rows(), Counts(t.cols()));
        for (std::size_t r = 0; r < t.rows(); ++r)
            for (std::size_t s = 0; s < t.cols(); ++s)
                permuted[r][s] = m[pr[r]][pc[s]];
        const auto rel = rmi::compare(table(permuted), nats());
        for (std::size_t i = 0; i < rep.measures.size(); ++i)
            if (rep.measures[i].second != rel.measures[i].second)
                note("relabeling changed " + rep.measures[i].first);

        const auto tr = rmi::compare(t.transposed(), nats());
        for (const char* name : {"mutual_information", "vi", "rmi_exact", "nrmi"})
            if (std::abs(measure(rep, name) - measure(tr, name)) > 1e-12)
                note(std::string("transpose changed ") + name);
    }

    double worst_gap = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const auto n = std::uniform_int_distribution<std::size_t>(1, 60)(rng);
        const auto x = oracle::random_labels(rng, n, 6);
        const auto y = oracle::random_labels(rng, n, 6);
        const auto z = oracle::random_labels(rng, n, 6);
        const auto vi = [](const std::vector<int>& a, const std::vector<int>& b) {
            return rmi::variation_of_information(table(oracle::joint(a, b)));
        };
        worst_gap = std::max(worst_gap, vi(x, z) - vi(x, y) - vi(y, z));
    }
    if (worst_gap > 1e-9)
        note("VI triangle inequality");

    std::string detail = std::to_string(accepted) + " pairs (" + std::to_string(skipped) +
                         " skipped with nmi/nrmi undefined), 500 triples, max triangle excess " + num(worst_gap);
    for (const auto& p : problems)
        detail += "; " + p;
    return {problems.empty(), detail};
}

// 8. Hypergeometric normalization and the two EMI routes.
Outcome hypergeometric_consistency()
{
    double worst_mass = 0.0, worst_emi = 0.0;
    std::uint64_t pairs = 0;
    for (std::uint64_t n = 1; n <= 8; ++n)
        for (std::size_t R = 1; R <= n; ++R)
            for (std::size_t S = 1; S <= n; ++S)
                for (const auto& rows : oracle::positive_compositions(n, R))
                    for (const auto& cols : oracle::positive_compositions(n, S)) {
                        const auto e = rmi::expected_mi_enumerated(rows, cols);
                        worst_mass = std::max(worst_mass, std::abs(e.total_probability - 1.0));
                        worst_emi = std::max(worst_emi, std::abs(e.emi - rmi::expected_mi_per_cell(rows, cols)));
                        ++pairs;
                    }
    return {worst_mass <= 1e-9 && worst_emi <= 1e-9,
            std::to_string(pairs) + " ordered margin pairs, n<=8: max |sum Q - 1| " + num(worst_mass) +
                ", max |EMI enumerated - per cell| " + num(worst_emi) + " (tol 1e-9)"};
}

// 9. Reduced MI of independent labelings goes negative and is not clamped.
Outcome negativity()
{
    std::mt19937_64 rng(909);
    int negative = 0, negative_ami = 0, exact = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto t = table(oracle::joint(oracle::random_labels(rng, 100, 5), oracle::random_labels(rng, 100, 5)));
        const auto rep = rmi::compare(t, nats());
        const double m = measure(rep, "rmi_exact");
        const double ami = measure(rep, "ami");
        negative += m < 0.0;
        negative_ami += ami < 0.0;
        exact += rep.omega->method == OmegaMethod::Exact;
        worst = std::max(worst, std::abs(m - (measure(rep, "rmi_first_term") - rep.omega->log_value / 100.0)));
        worst = std::max(worst, std::abs(ami - (measure(rep, "mutual_information") - measure(rep, "emi"))));
    }
    return {negative >= 1 && worst <= 1e-12,
            "100 pairs n=100, R=S=5 (" + std::to_string(exact) + " with exact counts): " + std::to_string(negative) +
                " with rmi_exact < 0, " + std::to_string(negative_ami) +
                " with ami < 0; max deviation from unclamped formulas " + num(worst)};
}

// 10. Karate divisions (non-gating).
Outcome karate()
{
    rmi::ReportOptions bits;
    const auto truth = rmi::read_labeling_file(RMI_TEST_DATA_DIR "/karate_truth.txt");
    const auto two = rmi::compare(truth, rmi::read_labeling_file(RMI_TEST_DATA_DIR "/karate_two_group.txt"), bits);
    const auto four = rmi::compare(truth, rmi::read_labeling_file(RMI_TEST_DATA_DIR "/karate_four_group.txt"), bits);
    const auto close = [](double v, double target) { return std::abs(v - target) <= 5e-4; };

    const bool omega_ok = two.omega->exact == "16" && four.omega->exact == "428";
    const bool rmi_ok = close(measure(two, "rmi_exact"), 0.670) && close(measure(four, "rmi_exact"), 0.550);
    const bool mi_ok =
        close(measure(two, "mutual_information"), 0.788) && close(measure(four, "mutual_information"), 0.807);
    const bool first_ok = close(measure(two, "rmi_first_term"), 0.788) && close(measure(four, "rmi_first_term"), 0.807);
    return {omega_ok && rmi_ok && mi_ok,
            "omega " + two.omega->exact.value_or("?") + "/" + four.omega->exact.value_or("?") + (omega_ok ? " ok" : " MISMATCH") +
                "; rmi_exact " + num(measure(two, "rmi_exact"), 4) + "/" + num(measure(four, "rmi_exact"), 4) +
                (rmi_ok ? " ok" : " MISMATCH") + "; mutual_information " +
                num(measure(two, "mutual_information"), 4) + "/" + num(measure(four, "mutual_information"), 4) +
                (mi_ok ? " ok" : " differs from 0.788/0.807") + "; rmi_first_term " +
                num(measure(two, "rmi_first_term"), 4) + "/" + num(measure(four, "rmi_first_term"), 4) +
                (first_ok ? " matches 0.788/0.807" : " MISMATCH")};
}

// 11. Full report for n = 10^6, R = S = 100.
Outcome performance()
{
    constexpr std::size_t n = 1'000'000;
    std::mt19937_64 rng(1111);
    std::uniform_int_distribution<int> group(0, 99);
    std::bernoulli_distribution agree(0.5);
    std::vector<int> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = group(rng);
        y[i] = agree(rng) ? x[i] : group(rng);
    }
    std::vector<double> seconds;
    rmi::MeasureReport rep;
    for (int run = 0; run < 3; ++run) {
        const auto start = Clock::now();
        rep = rmi::compare(rmi::make_labeling(x), rmi::make_labeling(y));
        seconds.push_back(std::chrono::duration<double>(Clock::now() - start).count());
    }
    const double slowest = *std::max_element(seconds.begin(), seconds.end());
    const bool de = rep.omega && rep.omega->method == OmegaMethod::DiaconisEfron;
    return {slowest < 1.0 && de && rep.R == 100 && rep.S == 100,
            "auto chose " + std::string(rep.omega ? rmi::to_string(rep.omega->method) : "none") + "; 3 runs " +
                num(seconds[0]) + "s, " + num(seconds[1]) + "s, " + num(seconds[2]) + "s (tol < 1s each)"};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance checks for the reduced mutual information library"};
    std::string dir;
    std::vector<int> only;
    app.add_option("--calibration-dir", dir, "Write the measured BBK and Diaconis-Efron errors here as TSV");
    app.add_option("--only", only, "Run only these criteria");
    CLI11_PARSE(app, argc, argv);
    if (!dir.empty()) {
        calibration_dir = dir;
        std::filesystem::create_directories(calibration_dir);
    }

    const std::vector<Criterion> criteria{
        {1, "degenerate exactness", true, degenerate_exactness},
        {2, "exact count equals enumeration", true, exact_oracle},
        {3, "multinomial identity", true, multinomial_identity},
        {4, "BBK calibration", true, bbk_calibration},
        {5, "Diaconis-Efron calibration", true, de_calibration},
        {6, "identical (2,2) labelings = 0.25 bits", true, identical_two_by_two},
        {7, "property fuzz", true, property_fuzz},
        {8, "hypergeometric consistency", true, hypergeometric_consistency},
        {9, "negativity exhibit", true, negativity},
        {10, "karate divisions (non-gating)", false, karate},
        {11, "performance n=10^6, R=S=100", true, performance},
    };

    bool ok = true;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end())
            continue;
        const auto start = Clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - start).count();
        std::cout << (out.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << c.id << "  " << c.title << ": "
                  << out.detail << " [" << num(secs) << "s]" << std::endl;
        if (c.gating && !out.pass)
            ok = false;
    }
    return ok ? 0 : 1;
}

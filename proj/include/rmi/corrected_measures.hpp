#pragma once

// Reduced mutual information: the mutual information less the information
// needed to transmit the contingency table. Also the normalized variant, the
// sparse-regime shortcut and the hypergeometric expected mutual information
// used by the adjusted mutual information.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "rmi/classic_measures.hpp"
#include "rmi/errors.hpp"
#include "rmi/log_math.hpp"
#include "rmi/omega.hpp"
#include "rmi/partitions.hpp"

namespace rmi {

struct RmiResult {
    double m_exact = 0.0;    ///< nats per object, exact first term less log Ω / n
    double m_stirling = 0.0; ///< nats per object, plug-in MI less log Ω / n
    LogCount log_omega;
    double first_term = 0.0; ///< (1/n) log[n! Π c! / (Π a! Π b!)]
};

namespace detail {

/// Largest n for which the exact first term is evaluated with big integers
/// when an exact table count is available.
inline constexpr std::uint64_t exact_rational_limit = 4096;

/// Π k! over the entries, computed incrementally in ascending order.
inline BigInt product_of_factorials(Margin counts)
{
    auto sorted = sorted_copy(counts);
    BigInt product = 1;
    BigInt running = 1;
    std::uint64_t at = 1;
    for (auto c : sorted) {
        for (; at < c; ++at)
            running *= at + 1;
        if (c > 1)
            product *= running;
    }
    return product;
}

/// log[n! Π c! / (Π a! Π b!)] from log-factorials.
inline double log_first_term(const ContingencyTable& t)
{
    const double cells = math::log_factorial(t.total()) + math::sum_log_factorials(t.counts());
    const double margins = math::sum_log_factorials(t.row_sums()) + math::sum_log_factorials(t.col_sums());
    return cells - margins;
}

struct TotalRmi {
    double first_term = 0.0; // nats, not per object
    double reduced = 0.0;
};

inline TotalRmi total_rmi(const ContingencyTable& t, const LogCount& omega)
{
    if (omega.exact_value && t.total() <= exact_rational_limit) {
        const BigInt num = math::factorial(t.total()) * product_of_factorials(t.counts());
        const BigInt den = product_of_factorials(t.row_sums()) * product_of_factorials(t.col_sums());
        return {math::log_ratio(num, den), math::log_ratio(num, den * *omega.exact_value)};
    }
    const double first = log_first_term(t);
    return {first, first - omega.log_value};
}

/// Reduced mutual information of a margin with itself, in total nats:
/// log(n!/Π a!) - log Ω(a, a).
inline double self_information(Margin margin, OmegaMethod method, std::uint64_t budget)
{
    const auto n = total(margin);
    const auto omega = count_tables(margin, margin, method, budget);
    if (omega.exact_value && n <= exact_rational_limit)
        return math::log_ratio(math::factorial(n), product_of_factorials(margin) * *omega.exact_value);
    return math::log_multinomial(n, margin) - omega.log_value;
}

} // namespace detail

/// Exact first term of the reduced mutual information, per object.
inline double exact_first_term(const ContingencyTable& t)
{
    return detail::log_first_term(t) / static_cast<double>(t.total());
}

inline RmiResult reduced_mi(const ContingencyTable& t, LogCount omega)
{
    const double n = static_cast<double>(t.total());
    const auto total = detail::total_rmi(t, omega);
    RmiResult out;
    out.first_term = total.first_term / n;
    out.m_exact = total.reduced / n;
    out.m_stirling = mutual_information(t) - omega.log_value / n;
    out.log_omega = std::move(omega);
    return out;
}

inline RmiResult reduced_mi(const ContingencyTable& t, OmegaMethod method = OmegaMethod::Auto,
                            std::uint64_t budget = default_exact_budget)
{
    return reduced_mi(t, count_tables(t.row_sums(), t.col_sums(), method, budget));
}

/// Sparse-regime shortcut: (1/n) Σ log c! - (2/n³) Σ C(a,2) Σ C(b,2).
inline double reduced_mi_sparse(const ContingencyTable& t)
{
    const double n = static_cast<double>(t.total());
    const auto pairs = [](Margin m) {
        std::uint64_t sum = 0;
        for (auto v : m)
            sum += v * (v - 1) / 2;
        return static_cast<double>(sum);
    };
    return math::sum_log_factorials(t.counts()) / n -
           2.0 / (n * n * n) * (pairs(t.row_sums()) * pairs(t.col_sums()));
}

/// Reduced mutual information divided by the mean of the two labelings'
/// self-comparison values; 1 for identical labelings. `omega` is the count
/// for the table's own margins; `method` is used for the self counts.
inline double normalized_rmi(const ContingencyTable& t, const LogCount& omega, OmegaMethod method,
                             std::uint64_t budget = default_exact_budget)
{
    const double numerator = 2.0 * detail::total_rmi(t, omega).reduced;
    const double denominator = detail::self_information(t.row_sums(), method, budget) +
                               detail::self_information(t.col_sums(), method, budget);
    const double scale = std::max(1.0, math::log_factorial(t.total()));
    if (std::abs(denominator) <= 1e-12 * scale)
        throw UndefinedMeasureError("normalized reduced mutual information is undefined: neither labeling carries "
                                    "information about itself (each is a single group or all singletons)");
    return numerator / denominator;
}

inline double normalized_rmi(const ContingencyTable& t, OmegaMethod method = OmegaMethod::Auto,
                             std::uint64_t budget = default_exact_budget)
{
    return normalized_rmi(t, count_tables(t.row_sums(), t.col_sums(), method, budget), method, budget);
}

/// Calls `visit(counts)` with the row-major counts of every table with the
/// given margins.
inline void for_each_table(Margin rows, Margin cols, const std::function<void(const std::vector<std::uint64_t>&)>& visit)
{
    validate_margins(rows, cols);
    const std::size_t R = rows.size();
    const std::size_t S = cols.size();
    std::vector<std::uint64_t> cells(R * S, 0);
    std::vector<std::uint64_t> col_left(cols.begin(), cols.end());

    std::function<void(std::size_t, std::size_t, std::uint64_t)> place = [&](std::size_t r, std::size_t s,
                                                                           std::uint64_t row_left) {
        if (r + 1 == R) {
            for (std::size_t j = 0; j < S; ++j)
                cells[r * S + j] = col_left[j];
            visit(cells);
            return;
        }
        if (s + 1 == S) {
            if (row_left > col_left[s])
                return;
            cells[r * S + s] = row_left;
            col_left[s] -= row_left;
            place(r + 1, 0, rows[r + 1]);
            col_left[s] += row_left;
            return;
        }
        std::uint64_t later = 0;
        for (std::size_t j = s + 1; j < S; ++j)
            later += col_left[j];
        const std::uint64_t lo = row_left > later ? row_left - later : 0;
        const std::uint64_t hi = std::min(row_left, col_left[s]);
        for (std::uint64_t c = lo; c <= hi; ++c) {
            cells[r * S + s] = c;
            col_left[s] -= c;
            place(r, s + 1, row_left - c);
            col_left[s] += c;
        }
    };
    place(0, 0, rows[0]);
}

/// Expected mutual information under the hypergeometric table distribution,
/// by enumerating every table. Also returns the total probability mass,
/// which is 1 up to rounding.
struct EnumeratedExpectation {
    double emi = 0.0;
    double total_probability = 0.0;
    std::uint64_t tables = 0;
};

inline EnumeratedExpectation expected_mi_enumerated(Margin rows_in, Margin cols_in)
{
    const auto rows = detail::sorted_copy(rows_in);
    const auto cols = detail::sorted_copy(cols_in);
    const auto n = detail::total(rows);
    const double nd = static_cast<double>(n);
    const std::size_t S = cols.size();
    const double log_margins = math::sum_log_factorials(rows) + math::sum_log_factorials(cols) - math::log_factorial(n);

    std::vector<double> weighted;
    std::vector<double> mass;
    for_each_table(rows, cols, [&](const std::vector<std::uint64_t>& cells) {
        const double q = std::exp(log_margins - math::sum_log_factorials(cells));
        std::vector<double> terms;
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (const auto c = cells[i]; c > 0) {
                const double a = static_cast<double>(rows[i / S]);
                const double b = static_cast<double>(cols[i % S]);
                const double cd = static_cast<double>(c);
                terms.push_back(cd / nd * std::log(nd * cd / (a * b)));
            }
        weighted.push_back(q * math::canonical_sum(std::move(terms)));
        mass.push_back(q);
    });
    EnumeratedExpectation out;
    out.tables = mass.size();
    out.emi = math::canonical_sum(std::move(weighted));
    out.total_probability = math::canonical_sum(std::move(mass));
    return out;
}

/// Expected mutual information as a sum over cells of the expectation of
/// (c/n) log(n c / (a b)) under each cell's hypergeometric marginal. Terms are
/// walked outward from the mode and stop once the probability falls below
/// 1e-18 of the modal probability.
inline double expected_mi_per_cell(Margin rows_in, Margin cols_in)
{
    const auto rows = detail::sorted_copy(rows_in);
    const auto cols = detail::sorted_copy(cols_in);
    const auto n = detail::total(rows);
    const double nd = static_cast<double>(n);
    constexpr double cutoff = 1e-18;

    std::vector<double> cell_terms;
    cell_terms.reserve(rows.size() * cols.size());
    for (auto a : rows)
        for (auto b : cols) {
            const std::uint64_t lo = a + b > n ? a + b - n : 0;
            const std::uint64_t hi = std::min(a, b);
            auto mode = static_cast<std::uint64_t>((static_cast<double>(a) + 1.0) * (static_cast<double>(b) + 1.0) /
                                                   (nd + 2.0));
            mode = std::clamp(mode, lo, hi);
            const double ad = static_cast<double>(a);
            const double bd = static_cast<double>(b);
            const double log_mode = math::log_factorial(a) + math::log_factorial(b) + math::log_factorial(n - a) +
                                    math::log_factorial(n - b) - math::log_factorial(n) -
                                    math::log_factorial(mode) - math::log_factorial(a - mode) -
                                    math::log_factorial(b - mode) - math::log_factorial(n - a - b + mode);
            const double p_mode = std::exp(log_mode);
            const auto term = [&](std::uint64_t c, double p) {
                if (c == 0)
                    return 0.0;
                const double cd = static_cast<double>(c);
                return p * cd / nd * std::log(nd * cd / (ad * bd));
            };

            std::vector<double> terms{term(mode, p_mode)};
            double p = p_mode;
            for (std::uint64_t c = mode; c < hi; ++c) {
                const double cd = static_cast<double>(c);
                p *= (ad - cd) * (bd - cd) / ((cd + 1.0) * (nd - ad - bd + cd + 1.0));
                if (p < cutoff * p_mode)
                    break;
                terms.push_back(term(c + 1, p));
            }
            p = p_mode;
            for (std::uint64_t c = mode; c > lo; --c) {
                const double cd = static_cast<double>(c);
                p *= cd * (nd - ad - bd + cd) / ((ad - cd + 1.0) * (bd - cd + 1.0));
                if (p < cutoff * p_mode)
                    break;
                terms.push_back(term(c - 1, p));
            }
            cell_terms.push_back(math::canonical_sum(std::move(terms)));
        }
    return math::canonical_sum(std::move(cell_terms));
}

struct AdjustedMi {
    double emi = 0.0;       ///< expected MI of tables with these margins, nats
    double ami = 0.0;       ///< MI less its expectation, nats
    bool enumerated = false; ///< true if the expectation came from full enumeration
};

struct AdjustedMiOptions {
    std::uint64_t budget = default_exact_budget;
    /// Enumerate tables only when there are at most this many.
    std::uint64_t max_enumerated_tables = 100'000;
};

inline AdjustedMi adjusted_mi(const ContingencyTable& t, const AdjustedMiOptions& options = {})
{
    const auto rows = t.row_sums();
    const auto cols = t.col_sums();
    AdjustedMi out;
    bool enumerate = false;
    if (estimated_exact_cost(rows, cols) <= static_cast<double>(options.budget)) {
        try {
            const auto omega = count_exact(rows, cols, options.budget);
            enumerate = *omega.exact_value <= options.max_enumerated_tables;
        } catch (const FeasibilityError&) {
        }
    }
    if (enumerate) {
        out.emi = expected_mi_enumerated(rows, cols).emi;
        out.enumerated = true;
    } else {
        out.emi = expected_mi_per_cell(rows, cols);
    }
    out.ami = mutual_information(t) - out.emi;
    return out;
}

} // namespace rmi

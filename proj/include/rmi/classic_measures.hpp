#pragma once

// Plug-in entropies and mutual information of two labelings, plus the exact
// description lengths of the four encodings of one labeling given the other.
// Everything is in nats per object.

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "rmi/errors.hpp"
#include "rmi/log_math.hpp"
#include "rmi/omega.hpp"
#include "rmi/partitions.hpp"

namespace rmi {

/// -Σ (b/n) log(b/n). Zero entries contribute nothing.
inline double entropy(Margin margin, std::uint64_t n)
{
    const double nd = static_cast<double>(n);
    std::vector<double> terms;
    terms.reserve(margin.size());
    for (auto b : margin)
        if (b > 0)
            terms.push_back(static_cast<double>(b) / nd * std::log(nd / static_cast<double>(b)));
    return math::canonical_sum(std::move(terms));
}

inline double row_entropy(const ContingencyTable& t) { return entropy(t.row_sums(), t.total()); }
inline double col_entropy(const ContingencyTable& t) { return entropy(t.col_sums(), t.total()); }

/// H(s|r) with r indexing rows: -Σ P(r,s) log(P(r,s)/P(r)).
inline double conditional_entropy(const ContingencyTable& t)
{
    const double n = static_cast<double>(t.total());
    std::vector<double> terms;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const double a = static_cast<double>(t.row_sums()[r]);
        for (std::size_t s = 0; s < t.cols(); ++s)
            if (const auto c = t(r, s); c > 0 && static_cast<double>(c) != a)
                terms.push_back(static_cast<double>(c) / n * std::log(a / static_cast<double>(c)));
    }
    return math::canonical_sum(std::move(terms));
}

/// Σ P(r,s) log(P(r,s)/(P(r)P(s))).
inline double mutual_information(const ContingencyTable& t)
{
    const double n = static_cast<double>(t.total());
    std::vector<double> terms;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const double a = static_cast<double>(t.row_sums()[r]);
        for (std::size_t s = 0; s < t.cols(); ++s)
            if (const auto c = t(r, s); c > 0) {
                const double b = static_cast<double>(t.col_sums()[s]);
                const double cd = static_cast<double>(c);
                terms.push_back(cd / n * std::log(n * cd / (a * b)));
            }
    }
    return math::canonical_sum(std::move(terms));
}

/// Mutual information over the mean of the two entropies.
inline double normalized_mi(const ContingencyTable& t)
{
    const double h = row_entropy(t) + col_entropy(t);
    if (h == 0.0)
        throw UndefinedMeasureError("normalized mutual information is undefined: both labelings place every "
                                    "object in a single group");
    return mutual_information(t) / (0.5 * h);
}

/// H(s|r) + H(r|s).
inline double variation_of_information(const ContingencyTable& t)
{
    const double forward = conditional_entropy(t);
    const double backward = conditional_entropy(t.transposed());
    return forward + backward;
}

/// Per-object lengths of the four encodings of the column labeling.
struct EncodingLengths {
    double h1 = 0.0; ///< the labeling sent outright: ceil(n log2 S) bits
    double h2 = 0.0; ///< column sizes, then the labeling
    double h3 = 0.0; ///< table with row sums known, then the labeling
    double h4 = 0.0; ///< column sizes, table with both margins known, then the labeling
};

namespace detail {

/// Smallest integer k with 2^k >= S^n.
inline double ceil_bits(std::uint64_t n, std::size_t groups)
{
    if (groups <= 1)
        return 0.0;
    if ((groups & (groups - 1)) == 0)
        return static_cast<double>(n) * static_cast<double>(std::countr_zero(groups));
    return std::ceil(static_cast<double>(n) * std::log2(static_cast<double>(groups)));
}

/// Σ_r log(a_r! / Π_s c_rs!): choices of the labeling given the table.
inline double log_labelings_given_table(const ContingencyTable& t)
{
    return math::sum_log_factorials(t.row_sums()) - math::sum_log_factorials(t.counts());
}

} // namespace detail

inline EncodingLengths encoding_lengths(const ContingencyTable& t, const LogCount& omega)
{
    const auto n = t.total();
    const auto S = t.cols();
    const double nd = static_cast<double>(n);
    const double sizes = math::log_binomial(n - 1, S - 1);
    const double given_table = detail::log_labelings_given_table(t);

    std::vector<double> rows_free;
    rows_free.reserve(t.rows());
    for (auto a : t.row_sums())
        rows_free.push_back(math::log_binomial(a + S - 1, S - 1));

    EncodingLengths e;
    e.h1 = detail::ceil_bits(n, S) * std::numbers::ln2 / nd;
    e.h2 = (sizes + math::log_multinomial(n, t.col_sums())) / nd;
    e.h3 = (math::canonical_sum(std::move(rows_free)) + given_table) / nd;
    e.h4 = (sizes + omega.log_value + given_table) / nd;
    return e;
}

inline EncodingLengths encoding_lengths(const ContingencyTable& t, OmegaMethod method = OmegaMethod::Auto,
                                        std::uint64_t budget = default_exact_budget)
{
    return encoding_lengths(t, count_tables(t.row_sums(), t.col_sums(), method, budget));
}

} // namespace rmi

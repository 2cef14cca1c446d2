#pragma once

// Counting non-negative integer matrices with fixed row and column sums.
//
// Four backends are provided: an exact counter, the sparse-limit estimate of
// Bekessy, Bekessy and Komlos, the symmetrized Diaconis-Efron estimate for
// dense tables, and an automatic selector.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rmi/errors.hpp"
#include "rmi/log_math.hpp"

namespace rmi {

enum class OmegaMethod { Exact, BBK, DiaconisEfron, Auto };

constexpr std::string_view to_string(OmegaMethod m) noexcept
{
    switch (m) {
    case OmegaMethod::Exact: return "exact";
    case OmegaMethod::BBK: return "bbk";
    case OmegaMethod::DiaconisEfron: return "de";
    case OmegaMethod::Auto: return "auto";
    }
    return "unknown";
}

inline OmegaMethod parse_omega_method(std::string_view name)
{
    for (auto m : {OmegaMethod::Exact, OmegaMethod::BBK, OmegaMethod::DiaconisEfron, OmegaMethod::Auto})
        if (name == to_string(m))
            return m;
    throw DataError("unknown table-counting method '" + std::string(name) + "' (expected auto, exact, bbk or de)");
}

/// A table count in the log domain. `exact_value` is set iff method is Exact.
struct LogCount {
    double log_value = 0.0;
    OmegaMethod method = OmegaMethod::Exact;
    std::optional<BigInt> exact_value;
};

using Margin = std::span<const std::uint64_t>;

/// Default limit on exact-search cost (distinct memo states plus row fillings).
inline constexpr std::uint64_t default_exact_budget = 10'000'000;

inline void validate_margins(Margin rows, Margin cols)
{
    if (rows.empty() || cols.empty())
        throw DataError("margins must be non-empty");
    for (auto m : {rows, cols})
        for (auto v : m)
            if (v == 0)
                throw DataError("margin entries must be positive");
    const auto n = std::accumulate(rows.begin(), rows.end(), std::uint64_t{0});
    const auto n2 = std::accumulate(cols.begin(), cols.end(), std::uint64_t{0});
    if (n != n2)
        throw DataError("row sums total " + std::to_string(n) + " but column sums total " + std::to_string(n2));
}

namespace detail {

inline std::uint64_t total(Margin m)
{
    return std::accumulate(m.begin(), m.end(), std::uint64_t{0});
}

inline std::vector<std::uint64_t> sorted_copy(Margin m)
{
    std::vector<std::uint64_t> v(m.begin(), m.end());
    std::sort(v.begin(), v.end());
    return v;
}

/// Column residuals of a partially filled table: sorted descending, zeros
/// dropped. Columns are exchangeable for the rows still to be filled, so
/// this is the memo key of the exact counter.
using Residuals = std::vector<std::uint32_t>;

struct ResidualsHash {
    std::size_t operator()(const Residuals& v) const noexcept
    {
        std::uint64_t h = 1469598103934665603ull;
        for (auto x : v) {
            h ^= x;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

/// Enumerates the ways of subtracting one row from a residual state, up to
/// permutations among columns of equal residual. Each visit sees the child
/// residuals (unsorted) and the multiplicity choices whose product of
/// binomials is the number of concrete rows the visit stands for.
class RowFiller {
public:
    struct Pick {
        std::uint32_t available;
        std::uint32_t taken;
    };

    explicit RowFiller(const Residuals& state)
    {
        for (std::size_t i = 0; i < state.size();) {
            std::size_t j = i;
            while (j < state.size() && state[j] == state[i])
                ++j;
            runs_.push_back({state[i], static_cast<std::uint32_t>(j - i)});
            i = j;
        }
        suffix_capacity_.assign(runs_.size() + 1, 0);
        for (std::size_t g = runs_.size(); g-- > 0;)
            suffix_capacity_[g] = suffix_capacity_[g + 1] + std::uint64_t{runs_[g].value} * runs_[g].count;
        child_.reserve(state.size());
    }

    template <class Visit>
    void run(std::uint64_t row_sum, Visit&& visit)
    {
        if (row_sum > suffix_capacity_[0])
            return;
        enter_group(0, row_sum, visit);
    }

private:
    struct Run {
        std::uint32_t value;
        std::uint32_t count;
    };

    template <class Visit>
    void enter_group(std::size_t g, std::uint64_t left, Visit& visit)
    {
        if (g == runs_.size()) {
            if (left == 0)
                visit(child_, picks_);
            return;
        }
        if (left > suffix_capacity_[g])
            return;
        const auto max_x = static_cast<std::uint32_t>(std::min<std::uint64_t>(runs_[g].value, left));
        fill(g, runs_[g].count, max_x, left, visit);
    }

    // Chooses the multiset of amounts taken from the columns of run g as a
    // sequence of (amount, multiplicity) pairs with decreasing amount.
    template <class Visit>
    void fill(std::size_t g, std::uint32_t k_left, std::uint32_t max_x, std::uint64_t left, Visit& visit)
    {
        const std::uint32_t v = runs_[g].value;
        if (left > std::uint64_t{k_left} * max_x + suffix_capacity_[g + 1])
            return;

        // Remaining columns of this run take nothing.
        const std::size_t mark = child_.size();
        child_.insert(child_.end(), k_left, v);
        enter_group(g + 1, left, visit);
        child_.resize(mark);

        for (std::uint32_t x = std::min<std::uint64_t>(max_x, left); x >= 1; --x) {
            const auto max_m = static_cast<std::uint32_t>(std::min<std::uint64_t>(k_left, left / x));
            for (std::uint32_t m = 1; m <= max_m; ++m) {
                if (v > x)
                    child_.insert(child_.end(), m, v - x);
                picks_.push_back({k_left, m});
                if (k_left == m)
                    enter_group(g + 1, left - std::uint64_t{m} * x, visit);
                else
                    fill(g, k_left - m, x - 1, left - std::uint64_t{m} * x, visit);
                picks_.pop_back();
                child_.resize(mark);
            }
        }
    }

    std::vector<Run> runs_;
    std::vector<std::uint64_t> suffix_capacity_;
    Residuals child_;
    std::vector<Pick> picks_;
};

/// Writes the canonical form of `r` (zeros dropped, sorted descending) into
/// `out`, reusing its storage.
inline void canonicalize(const Residuals& r, Residuals& out)
{
    out.clear();
    for (auto v : r)
        if (v != 0)
            out.push_back(v);
    std::sort(out.begin(), out.end(), std::greater<>());
}

inline Residuals canonical(const Residuals& r)
{
    Residuals out;
    canonicalize(r, out);
    return out;
}

/// Row-by-row exact counter. Rows are filled in ascending order of their
/// sums; the last (largest) row is forced by the residuals. Distinct
/// residual states are found level by level, then the counts are summed
/// back from the last level, so recursion depth does not grow with R.
class ExactTableCounter {
public:
    explicit ExactTableCounter(std::uint64_t budget) : budget_(budget) {}

    BigInt count(std::vector<std::uint64_t> rows, Margin cols)
    {
        std::sort(rows.begin(), rows.end());
        if (rows.size() <= 1 || cols.size() <= 1)
            return 1;
        Residuals root;
        for (auto c : cols) {
            if (c > std::numeric_limits<std::uint32_t>::max())
                throw FeasibilityError("margin entry too large for exact counting");
            root.push_back(static_cast<std::uint32_t>(c));
        }
        root = canonical(std::move(root));

        const std::size_t levels = rows.size();
        std::vector<std::vector<Residuals>> states(levels);
        std::vector<std::unordered_map<Residuals, std::uint32_t, ResidualsHash>> index(levels);
        states[0].push_back(root);
        index[0].emplace(root, 0);
        charge(1);

        for (std::size_t k = 0; k + 1 < levels; ++k) {
            auto& next_states = states[k + 1];
            auto& next_index = index[k + 1];
            Residuals key;
            for (std::size_t i = 0; i < states[k].size(); ++i) {
                RowFiller filler(states[k][i]);
                filler.run(rows[k], [&](const Residuals& child, const std::vector<RowFiller::Pick>&) {
                    charge(1);
                    canonicalize(child, key);
                    if (next_index.find(key) == next_index.end()) {
                        charge(1);
                        next_index.emplace(key, static_cast<std::uint32_t>(next_states.size()));
                        next_states.push_back(key);
                    }
                });
            }
        }

        std::vector<BigInt> below(states[levels - 1].size(), BigInt(1));
        for (std::size_t k = levels - 1; k-- > 0;) {
            std::vector<BigInt> here(states[k].size());
            const auto& next_index = index[k + 1];
            Residuals key;
            for (std::size_t i = 0; i < states[k].size(); ++i) {
                BigInt sum = 0;
                RowFiller filler(states[k][i]);
                filler.run(rows[k], [&](const Residuals& child, const std::vector<RowFiller::Pick>& picks) {
                    canonicalize(child, key);
                    const auto& ways = below[next_index.at(key)];
                    if (picks.empty()) {
                        sum += ways;
                        return;
                    }
                    BigInt weight = ways;
                    for (const auto& p : picks)
                        weight *= binomial(p.available, p.taken);
                    sum += weight;
                });
                here[i] = std::move(sum);
            }
            below = std::move(here);
        }
        return below.front();
    }

    std::uint64_t cost() const noexcept { return cost_; }

private:
    void charge(std::uint64_t units)
    {
        cost_ += units;
        if (cost_ > budget_)
            throw FeasibilityError("exact table count exceeds the search budget of " + std::to_string(budget_) +
                                   " steps; use an approximate method (bbk or de) or raise the budget");
    }

    const BigInt& binomial(std::uint32_t n, std::uint32_t k)
    {
        const auto key = (std::uint64_t{n} << 32) | k;
        auto it = binomials_.find(key);
        if (it == binomials_.end())
            it = binomials_.emplace(key, math::binomial(n, k)).first;
        return it->second;
    }

    std::uint64_t budget_;
    std::uint64_t cost_ = 0;
    std::unordered_map<std::uint64_t, BigInt> binomials_;
};

inline double log_add(double x, double y)
{
    if (x == -std::numeric_limits<double>::infinity())
        return y;
    if (y == -std::numeric_limits<double>::infinity())
        return x;
    const double hi = std::max(x, y);
    return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

// log of an estimate of how many residual vectors (or row fillings) exist
// with the given total, treating columns of equal size as exchangeable.
inline double log_exchangeable_choices(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& groups,
                                       std::uint64_t cap, std::uint64_t total, std::size_t columns)
{
    double log_free = 0.0;
    double span = 0.0;
    for (auto [value, count] : groups) {
        const auto m = std::min(value, cap);
        log_free += math::log_binomial(m + count, count);
        span += static_cast<double>(m) * static_cast<double>(count);
    }
    const double constrained = std::max(0.0, log_free + std::log(2.0) - std::log1p(span));
    return std::min(constrained, math::log_binomial(total + columns - 1, columns - 1));
}

/// log of the estimated exact-search cost with `rows` as the filled side.
inline double log_exact_cost(Margin rows_in, Margin cols)
{
    auto rows = sorted_copy(rows_in);
    if (rows.size() <= 1 || cols.size() <= 1)
        return 0.0;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> groups;
    for (auto c : sorted_copy(cols)) {
        if (!groups.empty() && groups.back().first == c)
            ++groups.back().second;
        else
            groups.emplace_back(c, 1);
    }
    const std::uint64_t n = total(cols);
    const std::size_t width = cols.size();
    double log_cost = 0.0;
    double log_reachable = 0.0;
    std::uint64_t prefix = 0;
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        const double log_fill = log_exchangeable_choices(groups, rows[k], rows[k], width);
        log_cost = log_add(log_cost, log_reachable + log_fill);
        prefix += rows[k];
        const double log_states = log_exchangeable_choices(groups, prefix, n - prefix, width);
        log_reachable = std::min(log_reachable + log_fill, log_states);
        log_cost = log_add(log_cost, log_reachable);
    }
    return log_cost;
}

inline BigInt multinomial_exact(Margin parts)
{
    BigInt result = 1;
    std::uint64_t so_far = 0;
    for (auto p : parts) {
        so_far += p;
        result *= math::binomial(so_far, p);
    }
    return result;
}

} // namespace detail

/// Estimated cost of the exact counter in its cheaper orientation. This is
/// a heuristic on the number of memo states and row fillings, not a bound.
inline double estimated_exact_cost(Margin rows, Margin cols)
{
    const double log_cost = std::min(detail::log_exact_cost(rows, cols), detail::log_exact_cost(cols, rows));
    return log_cost > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(log_cost);
}

/// Exact number of tables. Throws FeasibilityError when the search exceeds
/// `budget` steps.
inline LogCount count_exact(Margin rows, Margin cols, std::uint64_t budget = default_exact_budget)
{
    validate_margins(rows, cols);
    LogCount out;
    out.method = OmegaMethod::Exact;
    if (rows.size() == 1 || cols.size() == 1) {
        out.exact_value = BigInt(1);
        return out;
    }
    const double forward = detail::log_exact_cost(rows, cols);
    const double backward = detail::log_exact_cost(cols, rows);
    // Clearly hopeless searches fail without spending the budget.
    if (std::min(forward, backward) > std::log(static_cast<double>(budget)) + std::log(1e6))
        throw FeasibilityError("exact table count is infeasible for these margins (estimated search cost exceeds "
                               "the budget of " +
                               std::to_string(budget) + " steps by more than 10^6); use bbk or de");
    detail::ExactTableCounter counter(budget);
    BigInt count = forward <= backward ? counter.count(detail::sorted_copy(rows), cols)
                                       : counter.count(detail::sorted_copy(cols), rows);
    out.log_value = math::log(count);
    out.exact_value = std::move(count);
    return out;
}

/// Sparse-limit estimate: log(n!/(Πa!Πb!)) + (2/n²) Σ C(a_r,2) Σ C(b_s,2).
inline LogCount approx_bbk(Margin rows, Margin cols)
{
    validate_margins(rows, cols);
    const auto n = detail::total(rows);
    const auto pairs = [](Margin m) {
        std::uint64_t sum = 0;
        for (auto v : m)
            sum += v * (v - 1) / 2;
        return static_cast<double>(sum);
    };
    const double nd = static_cast<double>(n);
    const double factorials = math::sum_log_factorials(detail::sorted_copy(rows)) +
                              math::sum_log_factorials(detail::sorted_copy(cols));
    const double correction = 2.0 / (nd * nd) * (pairs(rows) * pairs(cols));
    LogCount out;
    out.method = OmegaMethod::BBK;
    out.log_value = math::log_factorial(n) - factorials + correction;
    return out;
}

/// Which sum runs in the shape parameters of the Diaconis-Efron estimate.
enum class DEVariant {
    /// mu uses Σ_s y_s², nu uses Σ_r x_r²: each sum runs over the index set
    /// of the variable being summed. This is the default.
    IndexConsistent,
    /// mu uses Σ_{r=1..R} y_r², literally summing the first R of the
    /// (sorted) column weights; only defined when R <= S. Equals
    /// IndexConsistent when R = S.
    Literal,
    /// mu uses Σ_r x_r², nu uses Σ_s y_s²: the sum index is kept and the
    /// variable adapted to it.
    SwappedSums,
};

struct DEParameters {
    double w = 0.0;
    std::vector<double> x;
    std::vector<double> y;
    double mu = 0.0;
    double nu = 0.0;
};

namespace detail {

inline std::vector<double> mixed_weights(Margin m, double w, double n)
{
    std::vector<double> out;
    out.reserve(m.size());
    const double uniform = (1.0 - w) / static_cast<double>(m.size());
    for (auto v : m)
        out.push_back(uniform + w * static_cast<double>(v) / n);
    return out;
}

inline double sum_squares(const std::vector<double>& v)
{
    std::vector<double> sq;
    sq.reserve(v.size());
    for (double t : v)
        sq.push_back(t * t);
    return math::canonical_sum(std::move(sq));
}

inline double shape(double count, double sum_sq)
{
    return (count + 1.0) / (count * sum_sq) - 1.0 / count;
}

// Terms of the estimate that belong to one side of the table: the side's
// weights, its count, the other side's count and this side's shape.
inline double de_side(const std::vector<double>& weights, double own, double other, double shape_param)
{
    std::vector<double> logs;
    logs.reserve(weights.size());
    for (double t : weights)
        logs.push_back(std::log(t));
    return 0.5 * (other + shape_param - 2.0) * math::canonical_sum(std::move(logs)) +
           0.5 * math::log_gamma(shape_param * own) -
           0.5 * own * (math::log_gamma(shape_param) + math::log_gamma(other));
}

} // namespace detail

inline DEParameters de_parameters(Margin rows, Margin cols, DEVariant variant = DEVariant::IndexConsistent)
{
    validate_margins(rows, cols);
    const double n = static_cast<double>(detail::total(rows));
    const double R = static_cast<double>(rows.size());
    const double S = static_cast<double>(cols.size());
    DEParameters p;
    p.w = n / (n + 0.5 * R * S);
    p.x = detail::mixed_weights(detail::sorted_copy(rows), p.w, n);
    p.y = detail::mixed_weights(detail::sorted_copy(cols), p.w, n);
    const double sx = detail::sum_squares(p.x);
    const double sy = detail::sum_squares(p.y);
    switch (variant) {
    case DEVariant::IndexConsistent:
        p.mu = detail::shape(R, sy);
        p.nu = detail::shape(S, sx);
        break;
    case DEVariant::Literal: {
        if (rows.size() > cols.size())
            throw DataError("literal Diaconis-Efron variant needs R <= S");
        const std::vector<double> first_y(p.y.begin(), p.y.begin() + static_cast<std::ptrdiff_t>(rows.size()));
        p.mu = detail::shape(R, detail::sum_squares(first_y));
        p.nu = detail::shape(S, sx);
        break;
    }
    case DEVariant::SwappedSums:
        p.mu = detail::shape(R, sx);
        p.nu = detail::shape(S, sy);
        break;
    }
    return p;
}

/// Symmetrized Diaconis-Efron estimate for dense tables.
inline LogCount approx_de(Margin rows, Margin cols, DEVariant variant = DEVariant::IndexConsistent)
{
    validate_margins(rows, cols);
    LogCount out;
    out.method = OmegaMethod::DiaconisEfron;
    if (rows.size() == 1 || cols.size() == 1)
        return out;
    const auto p = de_parameters(rows, cols, variant);
    const double n = static_cast<double>(detail::total(rows));
    const double R = static_cast<double>(rows.size());
    const double S = static_cast<double>(cols.size());
    const double lead = (R - 1.0) * (S - 1.0) * std::log(n + 0.5 * R * S);
    out.log_value = lead + (detail::de_side(p.x, R, S, p.mu) + detail::de_side(p.y, S, R, p.nu));
    return out;
}

/// Sparse regime for the automatic selector: mean cell occupancy at most
/// one and every margin entry at most max(2, ln n).
inline bool is_sparse_regime(Margin rows, Margin cols)
{
    const auto n = detail::total(rows);
    const double cells = static_cast<double>(rows.size()) * static_cast<double>(cols.size());
    if (static_cast<double>(n) > cells)
        return false;
    const double limit = std::max(2.0, std::log(static_cast<double>(n)));
    const auto largest = std::max(*std::max_element(rows.begin(), rows.end()),
                                  *std::max_element(cols.begin(), cols.end()));
    return static_cast<double>(largest) <= limit;
}

inline bool all_ones(Margin m)
{
    return std::all_of(m.begin(), m.end(), [](auto v) { return v == 1; });
}

/// Picks a backend: exact when affordable, the sparse estimate when one
/// margin is all ones (where it is exact) or the table is sparse, and the
/// dense estimate otherwise.
inline LogCount count_auto(Margin rows, Margin cols, std::uint64_t budget = default_exact_budget)
{
    validate_margins(rows, cols);
    if (rows.size() == 1 || cols.size() == 1)
        return count_exact(rows, cols, budget);
    if (all_ones(rows) || all_ones(cols))
        return approx_bbk(rows, cols);
    // The estimate usually overshoots the real cost, but not always, so a
    // search that runs out of budget still falls through to the estimates.
    if (estimated_exact_cost(rows, cols) <= static_cast<double>(budget)) {
        try {
            return count_exact(rows, cols, budget);
        } catch (const FeasibilityError&) {
        }
    }
    if (is_sparse_regime(rows, cols))
        return approx_bbk(rows, cols);
    return approx_de(rows, cols);
}

inline LogCount count_tables(Margin rows, Margin cols, OmegaMethod method,
                             std::uint64_t budget = default_exact_budget)
{
    switch (method) {
    case OmegaMethod::Exact: return count_exact(rows, cols, budget);
    case OmegaMethod::BBK: return approx_bbk(rows, cols);
    case OmegaMethod::DiaconisEfron: return approx_de(rows, cols);
    case OmegaMethod::Auto: return count_auto(rows, cols, budget);
    }
    throw DataError("unknown table-counting method");
}

} // namespace rmi

#pragma once

// Log-domain combinatorics and arbitrary-precision helpers shared by the
// measure and counting code.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace rmi {

using BigInt = boost::multiprecision::cpp_int;

namespace math {

inline double log_gamma(double x)
{
#if defined(__GLIBC__)
    // lgamma() writes the global signgam; the reentrant variant does not.
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

namespace detail {

inline constexpr std::size_t log_factorial_table_size = 4096;

inline const std::array<double, log_factorial_table_size>& log_factorial_table()
{
    static const auto table = [] {
        std::array<double, log_factorial_table_size> t{};
        for (std::size_t k = 0; k < t.size(); ++k)
            t[k] = log_gamma(static_cast<double>(k) + 1.0);
        return t;
    }();
    return table;
}

} // namespace detail

/// log(k!)
inline double log_factorial(std::uint64_t k)
{
    if (k < detail::log_factorial_table_size)
        return detail::log_factorial_table()[k];
    return log_gamma(static_cast<double>(k) + 1.0);
}

/// log C(n, k); requires k <= n.
inline double log_binomial(std::uint64_t n, std::uint64_t k)
{
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

/// Order-independent sum: the terms are sorted before a compensated
/// summation, so any permutation of the input gives the same bits.
inline double canonical_sum(std::vector<double> terms)
{
    std::sort(terms.begin(), terms.end());
    double sum = 0.0;
    double carry = 0.0;
    for (double t : terms) {
        const double next = sum + t;
        if (std::abs(sum) >= std::abs(t))
            carry += (sum - next) + t;
        else
            carry += (t - next) + sum;
        sum = next;
    }
    return sum + carry;
}

/// Σ log(k_i!) over the given counts, in canonical order.
inline double sum_log_factorials(std::span<const std::uint64_t> counts)
{
    std::vector<double> terms;
    terms.reserve(counts.size());
    for (auto c : counts)
        if (c > 1)
            terms.push_back(log_factorial(c));
    return canonical_sum(std::move(terms));
}

/// log(n! / Π parts!) where the parts sum to n.
inline double log_multinomial(std::uint64_t n, std::span<const std::uint64_t> parts)
{
    return log_factorial(n) - sum_log_factorials(parts);
}

/// Index of the most significant set bit; x must be positive.
inline std::size_t msb(const BigInt& x)
{
    return boost::multiprecision::msb(x);
}

/// Natural log of a positive big integer, accurate to double precision.
inline double log(const BigInt& x)
{
    const std::size_t top = msb(x);
    if (top < 64)
        return std::log(static_cast<double>(static_cast<std::uint64_t>(x)));
    const std::size_t shift = top - 63;
    const auto head = static_cast<std::uint64_t>(x >> shift);
    return std::log(static_cast<double>(head)) + static_cast<double>(shift) * std::numbers::ln2;
}

/// log(num / den) for positive big integers, evaluated on the quotient so
/// that nearly equal arguments do not lose precision. Returns exactly 0
/// when num == den.
inline double log_ratio(const BigInt& num, const BigInt& den)
{
    // Scale so the integer quotient carries at least 64 significant bits.
    const long long scale = static_cast<long long>(msb(den)) - static_cast<long long>(msb(num)) + 66;
    BigInt q;
    if (scale >= 0)
        q = (num << static_cast<std::size_t>(scale)) / den;
    else
        q = num / (den << static_cast<std::size_t>(-scale));
    const std::size_t top = msb(q);
    const std::size_t drop = top > 63 ? top - 63 : 0;
    const auto head = static_cast<std::uint64_t>(q >> drop);
    // head * 2^(drop - scale) with head in [2^63, 2^64); split off the
    // power of two so that an exact power gives log(1) = 0.
    const double mantissa = std::ldexp(static_cast<double>(head), -63);
    const long long exponent = static_cast<long long>(drop) - scale + 63;
    return std::log(mantissa) + static_cast<double>(exponent) * std::numbers::ln2;
}

inline BigInt factorial(std::uint64_t n)
{
    BigInt f = 1;
    for (std::uint64_t k = 2; k <= n; ++k)
        f *= k;
    return f;
}

inline BigInt binomial(std::uint64_t n, std::uint64_t k)
{
    if (k > n)
        return 0;
    k = std::min(k, n - k);
    BigInt c = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        c *= n - k + i;
        c /= i;
    }
    return c;
}

} // namespace math
} // namespace rmi

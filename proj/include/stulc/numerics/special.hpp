#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "stulc/error.hpp"

namespace stulc::numerics {

namespace detail {

inline bool is_nonpositive_integer(double v) { return v <= 0.0 && std::floor(v) == v; }

// Kummer series sum_n (a)_n/(c)_n x^n/n! for x >= 0 (or a terminating series).
inline double kummer_series(double a, double c, double x) {
    constexpr int max_terms = 5000;
    double term = 1.0;
    double sum = 1.0;
    for (int n = 0; n < max_terms; ++n) {
        const double ratio = (a + n) / (c + n) * x / (n + 1);
        term *= ratio;
        sum += term;
        if (term == 0.0) {
            return sum;
        }
        if (std::abs(term) <= 1e-17 * std::abs(sum) && std::abs(ratio) < 1.0) {
            return sum;
        }
    }
    throw NumericError("hyp1f1: Kummer series did not converge", sum);
}

// Asymptotic series sum_s (p)_s (q)_s / s! * x^{-s} for large x, truncated at
// the smallest term.
inline double asymptotic_series(double p, double q, double x) {
    double term = 1.0;
    double sum = 1.0;
    for (int s = 0; s < 500; ++s) {
        const double next = term * (p + s) * (q + s) / ((s + 1) * x);
        if (std::abs(next) >= std::abs(term) && s > 0) {
            break;
        }
        term = next;
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) {
            break;
        }
    }
    return sum;
}

} // namespace detail

/// Confluent hypergeometric function 1F1(a; c; z).
///
/// |z| <= 50: Kummer series; negative arguments go through the Kummer
/// transformation 1F1(a;c;z) = e^z 1F1(c-a;c;-z) so the summed terms do not
/// cancel. |z| > 50: leading asymptotic expansion (the exponentially
/// subdominant part is below double precision there).
inline double hyp1f1(double a, double c, double z) {
    if (detail::is_nonpositive_integer(c)) {
        throw DomainError("hyp1f1: c must not be a non-positive integer");
    }
    if (!std::isfinite(z) || !std::isfinite(a) || !std::isfinite(c)) {
        throw DomainError("hyp1f1: non-finite argument");
    }
    if (z == 0.0 || a == 0.0) {
        return 1.0;
    }
    constexpr double switch_magnitude = 50.0;
    if (z < 0.0) {
        if (detail::is_nonpositive_integer(a) && -z > switch_magnitude) {
            return detail::kummer_series(a, c, z); // polynomial
        }
        if (-z <= switch_magnitude || detail::is_nonpositive_integer(c - a)) {
            return std::exp(z) * detail::kummer_series(c - a, c, -z);
        }
        const double x = -z;
        return std::tgamma(c) / std::tgamma(c - a) * std::pow(x, -a) *
               detail::asymptotic_series(a, a - c + 1.0, x);
    }
    if (z <= switch_magnitude || detail::is_nonpositive_integer(a)) {
        return detail::kummer_series(a, c, z);
    }
    if (z > 700.0) {
        throw NumericError("hyp1f1: result overflows for z = " + std::to_string(z));
    }
    return std::tgamma(c) / std::tgamma(a) * std::exp(z) * std::pow(z, a - c) *
           detail::asymptotic_series(c - a, 1.0 - a, z);
}

/// Modified Bessel function of the second kind K_nu(x), x > 0.
inline double bessel_k(double order, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("bessel_k: x must be positive and finite");
    }
    return std::cyl_bessel_k(std::abs(order), x);
}

/// Standard normal upper tail Q(x) = P(N(0,1) > x).
inline double gaussian_q(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

} // namespace stulc::numerics

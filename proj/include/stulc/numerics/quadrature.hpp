#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <vector>

#include "stulc/error.hpp"

namespace stulc::numerics {

struct QuadratureSpec {
    double relative_tolerance = 1e-10;
    int max_subdivisions = 2000;
    // Absolute floor, so integrals that are exactly zero terminate.
    double absolute_tolerance = 0.0;

    void validate() const {
        require(relative_tolerance > 0.0, "quadrature relative_tolerance must be > 0");
        require(max_subdivisions >= 1, "quadrature max_subdivisions must be >= 1");
        require(absolute_tolerance >= 0.0, "quadrature absolute_tolerance must be >= 0");
    }
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
};

namespace detail {

// 21-point Gauss-Kronrod rule (QUADPACK qk21 abscissae and weights).
inline constexpr std::array<double, 11> gk21_nodes{
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> gk21_weights{
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208015799117, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// 10-point Gauss weights for the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 5> g10_weights{
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
    double lo;
    double hi;
    double value;
    double error;
    friend bool operator<(const Segment& a, const Segment& b) { return a.error < b.error; }
};

template <class F>
Segment gk21(F& f, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(center);
    double kronrod = fc * gk21_weights[10];
    double gauss = 0.0;
    for (std::size_t j = 0; j < 10; ++j) {
        const double dx = half * gk21_nodes[j];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += gk21_weights[j] * sum;
        if (j % 2 == 1) {
            gauss += g10_weights[j / 2] * sum;
        }
    }
    kronrod *= half;
    gauss *= half;
    return {lo, hi, kronrod, std::abs(kronrod - gauss)};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod integration over consecutive breakpoints
/// b[0] < b[1] < ... < b[n]. The interval with the largest error estimate is
/// bisected until the summed error meets the tolerance. Endpoint values are
/// never evaluated, so integrable endpoint singularities are allowed.
template <class F>
QuadratureResult adaptive_integrate_detailed(F&& f, std::span<const double> breakpoints,
                                             const QuadratureSpec& spec = {}) {
    spec.validate();
    if (breakpoints.size() < 2) {
        throw DomainError("adaptive_integrate needs at least two breakpoints");
    }
    std::priority_queue<detail::Segment> queue;
    double total = 0.0;
    double total_error = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i + 1] > breakpoints[i])) {
            if (breakpoints[i + 1] == breakpoints[i]) {
                continue;
            }
            throw DomainError("adaptive_integrate breakpoints must be increasing");
        }
        auto seg = detail::gk21(f, breakpoints[i], breakpoints[i + 1]);
        total += seg.value;
        total_error += seg.error;
        queue.push(seg);
    }
    int subdivisions = 0;
    const auto converged = [&] {
        return total_error <= std::max(spec.absolute_tolerance, spec.relative_tolerance * std::abs(total));
    };
    while (!queue.empty() && !converged()) {
        if (subdivisions >= spec.max_subdivisions) {
            throw NumericError("adaptive_integrate: subdivision budget exhausted", total, total_error);
        }
        const auto worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            throw NumericError("adaptive_integrate: interval collapsed below machine precision", total,
                               total_error);
        }
        const auto left = detail::gk21(f, worst.lo, mid);
        const auto right = detail::gk21(f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++subdivisions;
    }
    if (!std::isfinite(total)) {
        throw NumericError("adaptive_integrate: non-finite integrand", total, total_error);
    }
    // Re-sum from the segments to shed the drift of incremental updates.
    double value = 0.0;
    double error = 0.0;
    std::vector<detail::Segment> segments;
    segments.reserve(queue.size());
    while (!queue.empty()) {
        segments.push_back(queue.top());
        queue.pop();
    }
    std::sort(segments.begin(), segments.end(),
              [](const auto& a, const auto& b) { return a.lo < b.lo; });
    for (const auto& s : segments) {
        value += s.value;
        error += s.error;
    }
    return {value, error, subdivisions};
}

template <class F>
double adaptive_integrate(F&& f, double lo, double hi, const QuadratureSpec& spec = {}) {
    const std::array<double, 2> ends{lo, hi};
    return adaptive_integrate_detailed(f, ends, spec).value;
}

template <class F>
double adaptive_integrate(F&& f, std::initializer_list<double> breakpoints,
                          const QuadratureSpec& spec = {}) {
    return adaptive_integrate_detailed(f, std::span<const double>(breakpoints.begin(), breakpoints.size()),
                                       spec)
        .value;
}

/// Integral over [lo, inf) via x = lo + t/(1-t), t in [0, 1).
template <class F>
double integrate_to_infinity(F&& f, double lo, const QuadratureSpec& spec = {}) {
    auto mapped = [&](double t) {
        const double u = 1.0 - t;
        return f(lo + t / u) / (u * u);
    };
    return adaptive_integrate(mapped, 0.0, 1.0, spec);
}

struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Hermite rule for the weight exp(-x^2), n nodes, by Newton iteration on
/// the orthonormal Hermite recurrence.
inline GaussHermiteRule gauss_hermite(int n) {
    if (n < 1) {
        throw DomainError("gauss_hermite needs n >= 1");
    }
    const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
    GaussHermiteRule rule;
    rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
    rule.weights.assign(static_cast<std::size_t>(n), 0.0);
    const int half = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * rule.nodes[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * rule.nodes[1];
        } else {
            z = 2.0 * z - rule.nodes[static_cast<std::size_t>(i - 2)];
        }
        double derivative = 0.0;
        bool converged = false;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            derivative = std::sqrt(2.0 * n) * p2;
            const double z_old = z;
            z = z_old - p1 / derivative;
            if (std::abs(z - z_old) <= 1e-15 * std::max(1.0, std::abs(z))) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            throw NumericError("gauss_hermite: Newton iteration did not converge");
        }
        const double w = 2.0 / (derivative * derivative);
        rule.nodes[static_cast<std::size_t>(i)] = z;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = -z;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return rule;
}

} // namespace stulc::numerics

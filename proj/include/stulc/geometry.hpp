#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stulc/error.hpp"

namespace stulc {

/// Refractive-index ratio air/seawater.
inline constexpr double default_index_ratio = 0.75;

/// Satellite / sea surface / submerged receiver geometry (flat Earth).
/// Angles in radians, lengths in metres. The receiver sits at the origin and
/// the calm sea surface at z = depth.
struct LinkGeometry {
    double altitude = 200e3;       // H
    double depth = 10.0;           // D
    double offset = 0.0;           // D_T, nadir point to receiver, measured on the surface
    double zenith = 0.0;           // transmit zenith angle
    double refracted_zenith = 0.0; // calm-surface refraction angle
    double index_ratio = default_index_ratio;
};

namespace geometry_detail {

inline void check_common(double altitude, double depth, double index_ratio) {
    require(altitude > 0.0, "geometry: altitude must be > 0");
    require(depth >= 0.0, "geometry: depth must be >= 0");
    require(index_ratio > 0.0 && index_ratio < 1.0, "geometry: index ratio must lie in (0, 1)");
}

inline double horizontal_offset(double altitude, double depth, double index_ratio, double zenith) {
    const double refracted = std::asin(index_ratio * std::sin(zenith));
    return depth * std::tan(refracted) + altitude * std::tan(zenith);
}

} // namespace geometry_detail

/// Geometry for a given transmit zenith angle (forward direction).
inline LinkGeometry geometry_from_zenith(double altitude, double depth, double zenith,
                                         double index_ratio = default_index_ratio) {
    geometry_detail::check_common(altitude, depth, index_ratio);
    require(zenith >= 0.0 && zenith < std::numbers::pi / 2, "geometry: zenith must lie in [0, pi/2)");
    LinkGeometry g;
    g.altitude = altitude;
    g.depth = depth;
    g.zenith = zenith;
    g.index_ratio = index_ratio;
    g.refracted_zenith = std::asin(index_ratio * std::sin(zenith));
    g.offset = geometry_detail::horizontal_offset(altitude, depth, index_ratio, zenith);
    return g;
}

/// Transmit zenith angle that points the refracted beam at the receiver,
/// found by bisection on the monotone offset residual.
inline LinkGeometry solve_transmit_zenith(double altitude, double depth, double offset,
                                          double index_ratio = default_index_ratio) {
    geometry_detail::check_common(altitude, depth, index_ratio);
    require(offset >= 0.0, "geometry: horizontal offset must be >= 0");

    const auto residual = [&](double zenith) {
        return geometry_detail::horizontal_offset(altitude, depth, index_ratio, zenith) - offset;
    };
    double lo = 0.0;
    double hi = std::numbers::pi / 2 - 1e-9;
    if (residual(hi) < 0.0) {
        throw GeometryError("geometry: offset too large, transmit zenith would reach pi/2");
    }
    const double tolerance = 1e-9 * std::max(1.0, offset);
    if (residual(lo) >= 0.0) {
        hi = lo;
    }
    // Bisect to machine resolution; the residual tolerance is checked after.
    for (int iter = 0; iter < 200 && hi > lo; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (residual(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double zenith = std::abs(residual(lo)) <= std::abs(residual(hi)) ? lo : hi;
    if (std::abs(residual(zenith)) >= tolerance) {
        throw GeometryError("geometry: bisection failed to meet the offset residual tolerance");
    }
    LinkGeometry g = geometry_from_zenith(altitude, depth, zenith, index_ratio);
    g.offset = offset;
    return g;
}

/// Atmospheric slant path length L = H sec(zenith).
inline double slant_path_length(const LinkGeometry& geom) { return geom.altitude / std::cos(geom.zenith); }

} // namespace stulc

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "stulc/atmosphere.hpp"
#include "stulc/error.hpp"
#include "stulc/numerics/quadrature.hpp"
#include "stulc/numerics/rng.hpp"
#include "stulc/vec3.hpp"

namespace stulc::underwater {

struct WaterOptics {
    double k_a = 0.069;
    double k_s = 0.080;
    double g = 0.8708;

    double k_e() const { return k_a + k_s; }
    double albedo() const { return k_s / k_e(); }

    static WaterOptics clear() { return {0.069, 0.080, 0.8708}; }
    static WaterOptics coastal() { return {0.088, 0.216, 0.9470}; }

    void validate() const {
        require(k_a > 0.0, "water: k_a must be > 0");
        require(k_s >= 0.0, "water: k_s must be >= 0");
        require(std::abs(g) < 1.0, "water: |g| must be < 1");
    }
};

/// Oceanic turbulence: dissipation rates, temperature-salinity ratio and the
/// Kolmogorov microscale of the spectrum.
struct OceanTurbulence {
    double epsilon = 1e-2;  // m^2/s^3
    double chi_t = 1e-5;    // K^2/s
    double omega = -3.0;
    double kolmogorov_scale = 1e-3; // m

    static OceanTurbulence weak() { return {1e-2, 1e-5, -3.0, 1e-3}; }
    static OceanTurbulence strong() { return {1e-3, 1e-4, -0.25, 1e-3}; }
    static OceanTurbulence none() { return {1e-2, 0.0, -3.0, 1e-3}; }

    void validate() const {
        require(epsilon > 0.0, "ocean turbulence: epsilon must be > 0");
        require(chi_t >= 0.0, "ocean turbulence: chi_T must be >= 0");
        require(omega != 0.0, "ocean turbulence: omega must be non-zero");
        require(kolmogorov_scale > 0.0, "ocean turbulence: Kolmogorov scale must be > 0");
    }
};

/// Power spectrum of oceanic refractive-index fluctuations with a variable
/// eddy-diffusivity ratio (Nikishov-type, temperature/salinity/coupled terms):
///   Phi(k) = C0 a^2 chi_T / (4 pi w^2) eps^(-1/3) k^(-11/3) [1 + C1 (k n)^(2/3)]
///            * [w^2 e^(-A_T d) + d_r e^(-A_S d) - w (d_r + 1) e^(-A_TS d)]
///   d = 1.5 C1^2 (k n)^(4/3) + C1^3 (k n)^2
/// with C0 = 0.72, C1 = 2.35, a = 2.6e-4 1/K, Pr_T = 7, Pr_S = 700 and
/// A_T = C0/C1^2/Pr_T, A_S = C0/C1^2/Pr_S, A_TS = C0/C1^2 (Pr_T + Pr_S)/(2 Pr_T Pr_S).
inline double oceanic_spectrum(double kappa, const OceanTurbulence& turb) {
    constexpr double c0 = 0.72;
    constexpr double c1 = 2.35;
    constexpr double alpha = 2.6e-4;
    constexpr double pr_t = 7.0;
    constexpr double pr_s = 700.0;
    constexpr double base = c0 / (c1 * c1);
    constexpr double a_t = base / pr_t;
    constexpr double a_s = base / pr_s;
    constexpr double a_ts = base * (pr_t + pr_s) / (2.0 * pr_t * pr_s);
    if (kappa <= 0.0 || turb.chi_t == 0.0) {
        return 0.0;
    }
    const double w = turb.omega;
    const double aw = std::abs(w);
    double dr = 0.0;
    if (aw >= 1.0) {
        dr = aw + std::sqrt(aw) * std::sqrt(aw - 1.0);
    } else if (aw >= 0.5) {
        dr = 1.85 * aw - 0.85;
    } else {
        dr = 0.15 * aw;
    }
    const double kn = kappa * turb.kolmogorov_scale;
    const double kn23 = std::cbrt(kn * kn);
    const double delta = 1.5 * c1 * c1 * kn23 * kn23 + c1 * c1 * c1 * kn * kn;
    const double bracket =
        w * w * std::exp(-a_t * delta) + dr * std::exp(-a_s * delta) - w * (dr + 1.0) * std::exp(-a_ts * delta);
    return c0 * alpha * alpha * turb.chi_t / (4.0 * std::numbers::pi * w * w) * std::pow(turb.epsilon, -1.0 / 3.0) *
           std::pow(kappa, -11.0 / 3.0) * (1.0 + c1 * kn23) * bracket;
}

namespace detail {

// 1 - sin(x)/x, accurate for small x.
inline double one_minus_sinc(double x) {
    if (x < 1e-3) {
        const double x2 = x * x;
        return x2 / 6.0 - x2 * x2 / 120.0;
    }
    return 1.0 - std::sin(x) / x;
}

} // namespace detail

/// Spherical-wave Rytov variance over an underwater path of length L,
///   8 pi^2 k^2 L int_0^1 int_0^inf k Phi(k) [1 - cos(L k^2 xi / k)] dk dxi.
/// The xi integral is done in closed form, leaving
///   8 pi^2 k^2 L int_0^inf k Phi(k) [1 - sin(x)/x] dk,  x = L k^2 / k,
/// integrated over ln(kappa) on [1e-3, 1e3 / kolmogorov_scale].
inline double underwater_rytov(double length, const OceanTurbulence& turb, double k) {
    require(length > 0.0, "underwater_rytov: path length must be > 0");
    turb.validate();
    if (turb.chi_t == 0.0) {
        return 0.0;
    }
    const double eta = turb.kolmogorov_scale;
    const double lo = std::log(1e-3);
    const double hi = std::log(1e3 / eta);
    std::vector<double> points{lo, hi};
    const auto add = [&](double kappa) {
        const double u = std::log(kappa);
        if (u > lo && u < hi) {
            points.push_back(u);
        }
    };
    const double fresnel = std::sqrt(k / length);
    for (double m : {0.1, 1.0, 10.0}) {
        add(m * fresnel);
    }
    for (double m : {0.1, 1.0, 10.0, 100.0}) {
        add(m / eta);
    }
    std::sort(points.begin(), points.end());
    auto integrand = [&](double u) {
        const double kappa = std::exp(u);
        return kappa * kappa * oceanic_spectrum(kappa, turb) * detail::one_minus_sinc(length * kappa * kappa / k);
    };
    const double integral = numerics::adaptive_integrate_detailed(integrand, points, {1e-9, 5000, 0.0}).value;
    return 8.0 * std::numbers::pi * std::numbers::pi * k * k * length * integral;
}

/// Underwater Rytov variance tabulated on 128 log-spaced path lengths in
/// [1e-3, 1e3] m, interpolated (and extrapolated) linearly in log-log space.
class RytovTable {
public:
    static constexpr int nodes = 128;
    static constexpr double d_min = 1e-3;
    static constexpr double d_max = 1e3;

    RytovTable(const OceanTurbulence& turb, double k) {
        log_values_.resize(nodes);
        zero_ = turb.chi_t == 0.0;
        if (zero_) {
            return;
        }
        for (int i = 0; i < nodes; ++i) {
            const double d = node(i);
            const double v = underwater_rytov(d, turb, k);
            if (!(v > 0.0)) {
                throw NumericError("RytovTable: non-positive Rytov variance at a table node");
            }
            log_values_[static_cast<std::size_t>(i)] = std::log(v);
        }
    }

    static double node(int i) { return d_min * std::pow(d_max / d_min, static_cast<double>(i) / (nodes - 1)); }

    double operator()(double d) const {
        if (zero_ || !(d > 0.0)) {
            return 0.0;
        }
        const double pos = std::log(d / d_min) / std::log(d_max / d_min) * (nodes - 1);
        const int i = std::clamp(static_cast<int>(std::floor(pos)), 0, nodes - 2);
        const double frac = pos - i;
        const auto a = log_values_[static_cast<std::size_t>(i)];
        const auto b = log_values_[static_cast<std::size_t>(i) + 1];
        return std::exp(a + frac * (b - a));
    }

private:
    std::vector<double> log_values_;
    bool zero_ = false;
};

/// Second intensity moment M2 for one propagation leg: exp(sigma_R^2), and in
/// the saturated regime (sigma_R^2 > 1) 1 + sigma_I^2 from the large- and
/// small-scale log-irradiance variances.
inline double scintillation_moment(double sigma_r_sq) {
    if (sigma_r_sq <= 1.0) {
        return std::exp(std::max(0.0, sigma_r_sq));
    }
    const auto s = atmosphere::scintillation_scales(sigma_r_sq);
    return 1.0 + std::expm1(s.sigma_ln_x_sq + s.sigma_ln_y_sq);
}

/// prod_i M2(sigma_i^2) - 1 over the legs of one photon path.
inline double path_scintillation(const std::vector<double>& leg_rytov) {
    double product = 1.0;
    for (double s : leg_rytov) {
        product *= scintillation_moment(s);
    }
    return product - 1.0;
}

struct Photon {
    Vec3 position;
    Vec3 direction{0.0, 0.0, -1.0};
    double weight = 1.0;
    double transmittance = 1.0;
    int scatter_order = 0;
    std::vector<double> leg_lengths; // d_0, d_1, ... between interaction points
    bool alive = true;
};

/// Submerged receiver. zenith is the elevation of the FOV axis above the
/// horizontal, so the default 90 degrees looks straight up at the surface.
struct Receiver {
    Vec3 position;
    double aperture_area = 1.77e-4;
    double zenith = std::numbers::pi / 2;
    double azimuth = std::numbers::pi / 2;
    double fov_half_angle = std::numbers::pi / 2;

    Vec3 fov_axis() const {
        const double c = std::cos(zenith);
        return normalized({c * std::cos(azimuth), c * std::sin(azimuth), std::sin(zenith)});
    }
    double aperture_radius() const { return std::sqrt(aperture_area / std::numbers::pi); }
    /// Solid angle of the aperture seen from distance d on its axis.
    double solid_angle(double d) const {
        const double r = aperture_radius();
        return 2.0 * std::numbers::pi * (1.0 - d / std::sqrt(d * d + r * r));
    }

    void validate() const {
        require(aperture_area > 0.0, "receiver: aperture area must be > 0");
        require(fov_half_angle > 0.0 && fov_half_angle <= std::numbers::pi,
                "receiver: FOV half-angle must lie in (0, pi]");
    }
};

struct ChannelResult {
    std::vector<double> per_order_power;
    std::vector<double> per_order_scintillation;
    double total_power = 0.0;
    double sigma_tur_sq = 0.0;
    double standard_error = 0.0;
    long long photon_count = 0;
    long long discarded_photons = 0;
    std::uint64_t seed = 0;
    std::string scenario_id;
};

inline double sample_step(double k_e, numerics::RngStream& rng) { return -std::log(rng.uniform()) / k_e; }

/// Henyey-Greenstein phase function per steradian.
inline double hg_phase(double g, double cos_theta) {
    const double denom = 1.0 + g * g - 2.0 * g * cos_theta;
    return (1.0 - g * g) / (4.0 * std::numbers::pi * denom * std::sqrt(denom));
}

/// Scattering angle with cos(theta) from the HG inverse CDF.
inline double sample_hg_angle(double g, numerics::RngStream& rng) {
    const double u = rng.uniform();
    double mu = 0.0;
    if (std::abs(g) < 1e-8) {
        mu = 2.0 * u - 1.0;
    } else {
        const double s = (1.0 - g * g) / (1.0 - g + 2.0 * g * u);
        mu = (1.0 + g * g - s * s) / (2.0 * g);
    }
    return std::acos(std::clamp(mu, -1.0, 1.0));
}

/// Direction after deflection by polar angle theta and azimuth phi about mu.
inline Vec3 rotate_direction(const Vec3& mu, double theta, double phi) {
    const double st = std::sin(theta);
    const double ct = std::cos(theta);
    const double sp = std::sin(phi);
    const double cp = std::cos(phi);
    const double root = std::sqrt(std::max(0.0, 1.0 - mu.z * mu.z));
    Vec3 out;
    if (root < 1e-10) {
        out = {st * cp, st * sp, std::copysign(ct, mu.z)};
    } else {
        out = {st * (mu.x * mu.z * cp - mu.y * sp) / root + mu.x * ct,
               st * (mu.y * mu.z * cp + mu.x * sp) / root + mu.y * ct, -st * cp * root + mu.z * ct};
    }
    return normalized(out);
}

/// Receiver-relative geometry of an interaction point.
struct DetectionGeometry {
    double distance = 0.0;
    Vec3 to_receiver;    // unit vector from the point toward the receiver
    double cos_phi = 0.0; // FOV axis against the reversed arrival direction
    bool in_fov = false;
};

inline DetectionGeometry detection_geometry(const Vec3& point, const Receiver& rx, const Vec3& axis,
                                            double cos_fov) {
    DetectionGeometry g;
    const Vec3 from_rx = point - rx.position;
    g.distance = norm(from_rx);
    if (!(g.distance > 0.0)) {
        throw GeometryError("detection: interaction point coincides with the receiver");
    }
    const Vec3 outward = from_rx * (1.0 / g.distance);
    g.to_receiver = -outward;
    g.cos_phi = dot(axis, outward);
    g.in_fov = g.cos_phi >= cos_fov;
    return g;
}

/// Probability that a photon leaving scattering order n >= 1 at its current
/// position reaches the aperture: I_n (k_s/k_e)^n e^(-k_e d) cos(phi_r)
/// min(1, p_HG(theta) Omega_r), theta being the deflection needed to point at
/// the receiver.
inline double detection_probability(const Photon& photon, const Receiver& rx, const WaterOptics& optics,
                                    double scatter_theta) {
    const auto geo = detection_geometry(photon.position, rx, rx.fov_axis(), std::cos(rx.fov_half_angle));
    if (!geo.in_fov || geo.cos_phi <= 0.0) {
        return 0.0;
    }
    const double order_factor = std::pow(optics.albedo(), photon.scatter_order);
    const double phase = hg_phase(optics.g, std::cos(scatter_theta));
    return order_factor * std::exp(-optics.k_e() * geo.distance) * geo.cos_phi *
           std::min(1.0, phase * rx.solid_angle(geo.distance));
}

/// Zero-order (unscattered) detection. The angular factor is the theta_0
/// density spread over its azimuth ring, f(theta) / (2 pi sin theta), per
/// steradian.
inline double zero_order_detection(double distance, double cos_phi, double theta, double theta0_density,
                                   const Receiver& rx, double k_e) {
    if (cos_phi <= 0.0) {
        return 0.0;
    }
    const double s = std::sin(theta);
    double angular = theta0_density > 0.0 ? 1.0 : 0.0; // on-axis ring has zero width
    if (s > 0.0) {
        angular = std::min(1.0, theta0_density / (2.0 * std::numbers::pi * s) * rx.solid_angle(distance));
    }
    return std::exp(-k_e * distance) * cos_phi * angular;
}

} // namespace stulc::underwater

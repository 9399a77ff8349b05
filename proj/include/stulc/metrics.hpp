#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "stulc/error.hpp"
#include "stulc/numerics/quadrature.hpp"
#include "stulc/numerics/special.hpp"
#include "stulc/underwater.hpp"

namespace stulc::metrics {

inline constexpr double boltzmann = 1.380649e-23; // J/K, exact SI value

/// Thermal-noise-limited OOK receiver.
struct NoiseModel {
    double temperature = 300.0;
    double bandwidth = 1e9;
    double resistance = 1e6;
    double responsivity = 0.7;

    /// N0 = 4 K T B / R.
    double n0() const { return 4.0 * boltzmann * temperature * bandwidth / resistance; }

    void validate() const {
        require(temperature > 0.0, "noise: temperature must be > 0");
        require(bandwidth > 0.0, "noise: bandwidth must be > 0");
        require(resistance > 0.0, "noise: load resistance must be > 0");
        require(responsivity > 0.0, "noise: responsivity must be > 0");
    }
};

/// Lognormal received power with unit-mean fading around mean_power:
/// ln P ~ N(ln<P> - s/2, s), s = sigma_tur_sq.
struct PowerDistribution {
    double mean_power = 0.0;
    double sigma_tur_sq = 0.0;

    double pdf(double p) const {
        if (p <= 0.0 || sigma_tur_sq <= 0.0) {
            return 0.0;
        }
        const double z = std::log(p / mean_power) + 0.5 * sigma_tur_sq;
        return std::exp(-z * z / (2.0 * sigma_tur_sq)) / (p * std::sqrt(2.0 * std::numbers::pi * sigma_tur_sq));
    }

    double cdf(double p) const {
        if (p <= 0.0) {
            return 0.0;
        }
        if (sigma_tur_sq <= 0.0) {
            return p >= mean_power ? 1.0 : 0.0;
        }
        const double s = std::sqrt(sigma_tur_sq);
        return 1.0 - numerics::gaussian_q((std::log(p / mean_power) + 0.5 * sigma_tur_sq) / s);
    }
};

/// BER conditioned on received power P: Q(R_d P / sqrt(2 N0)).
inline double conditional_ber(double power, const NoiseModel& noise) {
    return numerics::gaussian_q(noise.responsivity * power / std::sqrt(2.0 * noise.n0()));
}

struct BerResult {
    double value = 0.5;
    double cross_check = 0.5;
    bool disagreement = false; // |Gauss-Hermite - adaptive| > 1e-6
};

/// Mean OOK BER over the lognormal power distribution: 64-node Gauss-Hermite
/// in ln P, cross-checked by adaptive quadrature over the standard normal.
inline BerResult mean_ber(const PowerDistribution& dist, const NoiseModel& noise) {
    noise.validate();
    require(dist.mean_power >= 0.0, "mean_ber: mean power must be >= 0");
    require(dist.sigma_tur_sq >= 0.0, "mean_ber: sigma_tur^2 must be >= 0");
    BerResult r;
    if (dist.mean_power == 0.0) {
        return r;
    }
    if (dist.sigma_tur_sq == 0.0) {
        r.value = r.cross_check = conditional_ber(dist.mean_power, noise);
        return r;
    }
    const double s = std::sqrt(dist.sigma_tur_sq);
    const double mu = std::log(dist.mean_power) - 0.5 * dist.sigma_tur_sq;
    static const auto rule = numerics::gauss_hermite(64);
    double gh = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        gh += rule.weights[i] * conditional_ber(std::exp(mu + std::numbers::sqrt2 * s * rule.nodes[i]), noise);
    }
    r.value = gh / std::sqrt(std::numbers::pi);
    const auto integrand = [&](double z) {
        return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi) * conditional_ber(std::exp(mu + s * z), noise);
    };
    r.cross_check = numerics::adaptive_integrate(integrand, {-40.0, -8.0, 0.0, 8.0, 40.0}, {1e-11, 4000, 1e-300});
    r.disagreement = std::abs(r.value - r.cross_check) > 1e-6;
    return r;
}

/// Electrical SNR 2 R R_d^2 P^2 / (4 K T B).
inline double snr(double power, const NoiseModel& noise) {
    require(power >= 0.0, "snr: power must be >= 0");
    return 2.0 * noise.resistance * noise.responsivity * noise.responsivity * power * power /
           (4.0 * boltzmann * noise.temperature * noise.bandwidth);
}

/// Received power at which the SNR equals gamma_th.
inline double power_threshold(double gamma_th, const NoiseModel& noise) {
    return std::sqrt(2.0 * gamma_th * boltzmann * noise.temperature * noise.bandwidth /
                     (noise.responsivity * noise.responsivity * noise.resistance));
}

/// P(SNR < gamma_th) = 1 - Q((ln(P_th/<P>) + s/2) / sqrt(s)). Step function for s = 0.
inline double outage_probability(const PowerDistribution& dist, const NoiseModel& noise, double gamma_th) {
    require(gamma_th > 0.0, "outage: threshold must be > 0");
    require(dist.mean_power > 0.0, "outage: mean power must be > 0");
    return dist.cdf(power_threshold(gamma_th, noise));
}

/// Photon-count-weighted average of several channel runs.
inline PowerDistribution fit_power_distribution(const std::vector<underwater::ChannelResult>& results) {
    require(!results.empty(), "fit_power_distribution: no results");
    double count = 0.0;
    double power = 0.0;
    double sigma = 0.0;
    for (const auto& r : results) {
        const auto n = static_cast<double>(r.photon_count);
        count += n;
        power += n * r.total_power;
        sigma += n * r.sigma_tur_sq;
    }
    if (!(count > 0.0) || !(power > 0.0)) {
        throw NumericError("fit_power_distribution: zero received power");
    }
    return {power / count, sigma / count};
}

} // namespace stulc::metrics

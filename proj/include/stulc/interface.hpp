#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "stulc/error.hpp"
#include "stulc/geometry.hpp"
#include "stulc/numerics/quadrature.hpp"
#include "stulc/numerics/rng.hpp"
#include "stulc/vec3.hpp"

namespace stulc::interface {

/// Cox-Munk slope statistics. sigma_sq is the slope-variance parameter of the
/// pitch-angle density f(theta_p) = exp(-tan^2/s) |tan| / (s cos^2).
struct CoxMunkParams {
    double wind_speed = 6.0;
    double sigma_sq = 0.0;

    static CoxMunkParams from_wind(double v) {
        require(v >= 0.0, "interface: wind speed must be >= 0");
        return {v, std::sqrt(0.003 + 0.00512 * v)};
    }
    /// Explicit slope parameter, bypassing the wind relation (tests, calm limits).
    static CoxMunkParams with_sigma_sq(double sigma_sq) {
        require(sigma_sq > 0.0, "interface: sigma_sq must be > 0");
        return {0.0, sigma_sq};
    }
};

/// Density of the signed pitch t on (-pi/2, pi/2); each sign carries half the
/// mass, so |t| has density 2 * pitch_density(|t|).
inline double pitch_density(double t, double sigma_sq) {
    const double c = std::cos(t);
    if (c <= 0.0) {
        return 0.0;
    }
    const double tn = std::tan(t);
    return std::exp(-tn * tn / sigma_sq) * std::abs(tn) / (c * c * sigma_sq);
}

/// Inverse-CDF draw, theta_p = arctan(sqrt(-sigma^2 ln u)).
inline double sample_pitch_angle(const CoxMunkParams& params, numerics::RngStream& rng) {
    return std::atan(std::sqrt(-params.sigma_sq * std::log(rng.uniform())));
}

inline Vec3 facet_normal_from_angles(double pitch, double azimuth) {
    const double s = std::sin(pitch);
    return {std::cos(azimuth) * s, std::sin(azimuth) * s, std::cos(pitch)};
}

/// Facet normal with Cox-Munk pitch and uniform azimuth.
inline Vec3 facet_normal(const CoxMunkParams& params, numerics::RngStream& rng) {
    const double pitch = sample_pitch_angle(params, rng);
    const double azimuth = 2.0 * std::numbers::pi * rng.uniform();
    return facet_normal_from_angles(pitch, azimuth);
}

struct RefractionEvent {
    Vec3 incident_dir;
    Vec3 facet_normal;
    Vec3 refracted_dir;
    double alpha = 0.0;
    double beta = 0.0;
    double transmittance = 0.0;
};

/// Unpolarized Fresnel power transmittance for incidence alpha, refraction beta.
inline double fresnel_transmittance(double alpha, double beta) {
    const double sum = alpha + beta;
    if (std::abs(sum) < 1e-6) {
        // Normal incidence: both polarizations give 4n/(1+n)^2 with n = sin(a)/sin(b).
        const double ratio = std::abs(alpha) > 0.0 ? beta / alpha : default_index_ratio;
        return 4.0 * ratio / ((1.0 + ratio) * (1.0 + ratio));
    }
    const double s = std::sin(sum);
    const double c = std::cos(alpha - beta);
    return 0.5 * std::abs(std::sin(2.0 * alpha) * std::sin(2.0 * beta) / (s * s) * (1.0 + c * c) / (c * c));
}

/// T = eta E + N (eta cos(alpha) - sqrt(1 - eta^2 (1 - cos^2(alpha)))).
inline RefractionEvent refract(const Vec3& incident, const Vec3& normal, double eta) {
    const double cos_alpha = -dot(normal, incident);
    if (!(cos_alpha > 0.0)) {
        throw GeometryError("refract: ray does not travel into the facet");
    }
    RefractionEvent ev;
    ev.incident_dir = incident;
    ev.facet_normal = normal;
    const double radicand = 1.0 - eta * eta * (1.0 - cos_alpha * cos_alpha);
    ev.refracted_dir = normalized(eta * incident + (eta * cos_alpha - std::sqrt(radicand)) * normal);
    ev.alpha = std::acos(std::min(1.0, cos_alpha));
    ev.beta = std::asin(std::min(1.0, eta * std::sin(ev.alpha)));
    ev.transmittance = fresnel_transmittance(ev.alpha, ev.beta);
    return ev;
}

/// Closed-form density of theta_0, the angle between the facet-refracted ray
/// and the calm-surface refracted direction T', for in-plane facet tilts.
///
/// The incidence angle alpha maps monotonically onto the deviation
/// gamma = alpha - beta, with inverse
///     sin^2(alpha) = sin^2(gamma) / ((1 - eta)^2 + 4 eta sin^2(gamma/2))
/// and d gamma / d alpha = 1 - eta cos(alpha) / sqrt(1 - eta^2 sin^2(alpha)).
/// Three terms contribute, with delta = zeta - zeta':
///   A  gamma = delta + theta_0, facet tilted toward the beam  (alpha = zeta + t)
///   B  gamma = delta - theta_0, theta_0 < delta               (alpha = zeta + t)
///   C  gamma = theta_0 - delta, theta_0 >= delta              (alpha = t - zeta)
/// Facets steeper than grazing do not transmit; the density is normalized by
/// the retained probability, i.e. it is conditional on transmission.
class Theta0Pdf {
public:
    static constexpr int table_nodes = 4096;

    Theta0Pdf(double zeta, double sigma_sq, double eta = default_index_ratio)
        : zeta_(zeta), eta_(eta), sigma_sq_(sigma_sq) {
        require(zeta >= 0.0 && zeta < std::numbers::pi / 2, "theta0 pdf: zeta must lie in [0, pi/2)");
        require(sigma_sq > 0.0, "theta0 pdf: sigma_sq must be > 0");
        require(eta > 0.0 && eta < 1.0, "theta0 pdf: eta must lie in (0, 1)");
        zeta_prime_ = std::asin(eta * std::sin(zeta));
        delta_ = zeta_ - zeta_prime_;
        gamma_max_ = std::acos(eta_);
        gamma_c_max_ = deviation(std::numbers::pi / 2 - zeta_);
        support_max_ = std::abs(zeta_ - zeta_prime_ - gamma_max_);
        upper_ = std::max(support_max_, delta_ + gamma_c_max_);
        build_table();
    }

    double zeta() const { return zeta_; }
    double zeta_prime() const { return zeta_prime_; }
    double sigma_sq() const { return sigma_sq_; }
    double eta() const { return eta_; }
    /// End of the first term's range, |zeta - zeta' - arccos(eta)|.
    double support_max() const { return support_max_; }
    /// Largest theta_0 with non-zero density (max over the three terms).
    double support_upper() const { return upper_; }
    /// Probability that a facet draw transmits at all.
    double retained_mass() const { return mass_; }
    /// Joins between terms: delta and delta + gamma(pi/2 - zeta).
    std::array<double, 2> branch_points() const { return {delta_, delta_ + gamma_c_max_}; }

    /// gamma(alpha) = alpha - arcsin(eta sin(alpha)).
    double deviation(double alpha) const { return alpha - std::asin(eta_ * std::sin(alpha)); }

    double incidence_from_deviation(double gamma) const {
        const double s = std::sin(gamma);
        const double h = std::sin(0.5 * gamma);
        const double s2 = s * s / ((1.0 - eta_) * (1.0 - eta_) + 4.0 * eta_ * h * h);
        return std::asin(std::sqrt(std::clamp(s2, 0.0, 1.0)));
    }

    double deviation_slope(double alpha) const {
        const double sa = std::sin(alpha);
        return 1.0 - eta_ * std::cos(alpha) / std::sqrt(1.0 - eta_ * eta_ * sa * sa);
    }

    /// Density before conditioning on transmission (integrates to retained_mass()).
    double unnormalized(double theta0) const {
        if (theta0 < 0.0 || theta0 > upper_) {
            return 0.0;
        }
        double f = 0.0;
        const double ga = delta_ + theta0;
        if (ga < gamma_max_) {
            f += term(ga, -zeta_);
        }
        if (theta0 < delta_) {
            f += term(delta_ - theta0, -zeta_);
        } else {
            const double gc = theta0 - delta_;
            if (gc < gamma_c_max_) {
                f += term(gc, zeta_);
            }
        }
        return f;
    }

    double density(double theta0) const { return unnormalized(theta0) / mass_; }

    /// Density interpolated from the node table; cheap enough for per-photon scoring.
    double tabulated_density(double theta0) const {
        if (theta0 < 0.0 || theta0 > upper_) {
            return 0.0;
        }
        const double pos = theta0 / step_;
        const auto i = std::min(static_cast<std::size_t>(pos), nodes_.size() - 2);
        const double frac = pos - static_cast<double>(i);
        return nodes_[i] + frac * (nodes_[i + 1] - nodes_[i]);
    }

    double cdf(double theta0) const {
        if (theta0 <= 0.0) {
            return 0.0;
        }
        if (theta0 >= upper_) {
            return 1.0;
        }
        const double pos = theta0 / step_;
        const auto i = std::min(static_cast<std::size_t>(pos), cdf_.size() - 2);
        const double frac = pos - static_cast<double>(i);
        return cdf_[i] + frac * (cdf_[i + 1] - cdf_[i]);
    }

    /// Inverse-transform draw from the tabulated CDF (linear within a node interval).
    double sample(numerics::RngStream& rng) const {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        const auto hi = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - cdf_.begin(), 1,
                                                                           static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
        const std::size_t lo = hi - 1;
        const double width = cdf_[hi] - cdf_[lo];
        const double frac = width > 0.0 ? (u - cdf_[lo]) / width : 0.5;
        return step_ * (static_cast<double>(lo) + frac);
    }

    /// Breakpoints for integrating the density: term joins plus points that
    /// bracket the pitch-angle peak, which is very narrow for calm seas.
    std::vector<double> quadrature_breakpoints() const {
        std::vector<double> points{0.0, upper_};
        const auto add = [&](double p) {
            if (p > 0.0 && p < upper_) {
                points.push_back(p);
            }
        };
        add(delta_);
        add(delta_ + gamma_c_max_);
        add(support_max_);
        const double scale = std::sqrt(sigma_sq_);
        for (double m : {0.03, 0.1, 0.3, 0.7, 1.0, 1.5, 2.5, 4.0}) {
            const double t = std::atan(m * scale);
            const double a1 = zeta_ + t;
            if (a1 < std::numbers::pi / 2) {
                add(deviation(a1) - delta_);
                add(delta_ - deviation(a1));
            }
            const double a2 = t - zeta_;
            if (a2 > 0.0 && a2 < std::numbers::pi / 2) {
                add(deviation(a2) + delta_);
            }
        }
        std::sort(points.begin(), points.end());
        points.erase(std::unique(points.begin(), points.end()), points.end());
        return points;
    }

private:
    // f_alpha(alpha) / gamma'(alpha) for a facet pitch of alpha + shift.
    double term(double gamma, double shift) const {
        const double alpha = incidence_from_deviation(gamma);
        const double slope = deviation_slope(alpha);
        if (!(slope > 0.0)) {
            return 0.0;
        }
        return pitch_density(alpha + shift, sigma_sq_) / slope;
    }

    void build_table() {
        step_ = upper_ / (table_nodes - 1);
        const auto breaks = quadrature_breakpoints();
        cdf_.assign(table_nodes, 0.0);
        const numerics::QuadratureSpec spec{1e-9, 4000, 1e-15};
        std::size_t b = 0;
        for (int i = 1; i < table_nodes; ++i) {
            const double lo = step_ * (i - 1);
            const double hi = i == table_nodes - 1 ? upper_ : step_ * i;
            std::vector<double> pts{lo};
            while (b < breaks.size() && breaks[b] <= lo) {
                ++b;
            }
            for (std::size_t j = b; j < breaks.size() && breaks[j] < hi; ++j) {
                pts.push_back(breaks[j]);
            }
            pts.push_back(hi);
            const double piece =
                numerics::adaptive_integrate_detailed([&](double t) { return unnormalized(t); }, pts, spec).value;
            if (!std::isfinite(piece) || piece < 0.0) {
                throw NumericError("theta0 pdf: non-finite density while building the CDF table");
            }
            cdf_[static_cast<std::size_t>(i)] = cdf_[static_cast<std::size_t>(i) - 1] + piece;
        }
        mass_ = cdf_.back();
        if (!(mass_ > 0.0)) {
            throw NumericError("theta0 pdf: zero retained probability");
        }
        for (auto& c : cdf_) {
            c /= mass_;
        }
        nodes_.resize(cdf_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            nodes_[i] = density(std::min(upper_, step_ * static_cast<double>(i)));
        }
        cdf_.back() = 1.0;
    }

    double zeta_;
    double eta_;
    double sigma_sq_;
    double zeta_prime_ = 0.0;
    double delta_ = 0.0;
    double gamma_max_ = 0.0;
    double gamma_c_max_ = 0.0;
    double support_max_ = 0.0;
    double upper_ = 0.0;
    double mass_ = 1.0;
    double step_ = 0.0;
    std::vector<double> cdf_;
    std::vector<double> nodes_;
};

inline double theta0_pdf(const Theta0Pdf& pdf, double theta0) { return pdf.density(theta0); }

inline double sample_theta0(const Theta0Pdf& pdf, numerics::RngStream& rng) { return pdf.sample(rng); }

/// Incident beam direction E_T for transmit zenith zeta (beam travels toward -y, -z).
inline Vec3 incident_direction(double zeta) { return {0.0, -std::sin(zeta), -std::cos(zeta)}; }

/// Result of the brute-force refraction experiment used to validate Theta0Pdf.
struct Theta0Histogram {
    std::vector<double> density; // normalized over transmitted samples
    double bin_width = 0.0;
    long long transmitted = 0;
    long long rejected = 0;      // grazing facets, cos(alpha) <= 0
    long long beyond_support = 0;
};

/// Refracts n sampled facets and histograms theta_0 over [0, pdf.support_upper()].
/// in_plane = true tilts facets within the plane of incidence with a random
/// sign (the closed form's assumption); false draws a uniform azimuth.
inline Theta0Histogram brute_force_theta0(const Theta0Pdf& pdf, long long n, int bins, bool in_plane,
                                          numerics::RngStream& rng) {
    require(bins >= 1 && n >= 1, "brute_force_theta0: need n >= 1 and bins >= 1");
    const auto params = CoxMunkParams::with_sigma_sq(pdf.sigma_sq());
    const Vec3 incident = incident_direction(pdf.zeta());
    const Vec3 calm{0.0, -std::sin(pdf.zeta_prime()), -std::cos(pdf.zeta_prime())};
    Theta0Histogram h;
    h.bin_width = pdf.support_upper() / bins;
    std::vector<long long> counts(static_cast<std::size_t>(bins), 0);
    for (long long i = 0; i < n; ++i) {
        const double pitch = sample_pitch_angle(params, rng);
        const double azimuth = in_plane ? (rng.uniform() < 0.5 ? std::numbers::pi / 2 : -std::numbers::pi / 2)
                                        : 2.0 * std::numbers::pi * rng.uniform();
        const Vec3 normal = facet_normal_from_angles(pitch, azimuth);
        if (!(-dot(normal, incident) > 0.0)) {
            ++h.rejected;
            continue;
        }
        const auto ev = refract(incident, normal, pdf.eta());
        const double theta0 = angle_between(ev.refracted_dir, calm);
        ++h.transmitted;
        if (theta0 >= pdf.support_upper()) {
            ++h.beyond_support;
            continue;
        }
        ++counts[std::min(static_cast<std::size_t>(theta0 / h.bin_width), counts.size() - 1)];
    }
    h.density.resize(counts.size());
    for (std::size_t b = 0; b < counts.size(); ++b) {
        h.density[b] = h.transmitted > 0 ? static_cast<double>(counts[b]) / (h.transmitted * h.bin_width) : 0.0;
    }
    return h;
}

/// L1 distance between a histogram and the closed form averaged over each bin.
inline double theta0_l1_distance(const Theta0Pdf& pdf, const Theta0Histogram& h) {
    double l1 = 0.0;
    const numerics::QuadratureSpec spec{1e-8, 2000, 1e-14};
    const auto breaks = pdf.quadrature_breakpoints();
    for (std::size_t b = 0; b < h.density.size(); ++b) {
        const double lo = h.bin_width * static_cast<double>(b);
        const double hi = lo + h.bin_width;
        std::vector<double> pts{lo};
        for (double p : breaks) {
            if (p > lo && p < hi) {
                pts.push_back(p);
            }
        }
        pts.push_back(hi);
        const double mass = numerics::adaptive_integrate_detailed([&](double t) { return pdf.density(t); }, pts, spec)
                                .value;
        l1 += std::abs(h.density[b] * h.bin_width - mass);
    }
    return l1;
}

} // namespace stulc::interface

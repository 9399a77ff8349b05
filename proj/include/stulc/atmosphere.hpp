#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "stulc/error.hpp"
#include "stulc/geometry.hpp"
#include "stulc/numerics/quadrature.hpp"
#include "stulc/numerics/rng.hpp"
#include "stulc/numerics/special.hpp"

namespace stulc::atmosphere {

/// Hufnagel-Valley turbulence profile parameters.
struct TurbulenceProfile {
    double ground_cn2 = 1.7e-17;      // C_n^2(0), m^(-2/3)
    double high_altitude_wind = 21.0; // m/s
    double outer_scale = 10.0;        // L0, m

    static TurbulenceProfile weak() { return {1.7e-17, 21.0, 10.0}; }
    static TurbulenceProfile strong() { return {1.7e-13, 21.0, 10.0}; }

    void validate() const {
        require(ground_cn2 >= 0.0, "atmosphere: ground Cn2 must be >= 0");
        require(high_altitude_wind >= 0.0, "atmosphere: high-altitude wind must be >= 0");
        // The outer-scale correction [1 - 0.715 kappa0^(1/3)] must stay positive.
        require(outer_scale > 2.0 * std::numbers::pi * 0.715 * 0.715 * 0.715,
                "atmosphere: outer scale must exceed 2.30 m");
    }
};

/// Laser beam parameters at the transmitter.
struct BeamParams {
    double wavelength = 532e-9;
    double divergence = 22e-6; // beta_T, rad
    double transmit_power = 5.0;
    double phase_front_radius = std::numeric_limits<double>::infinity();
    double atmospheric_transmittance = 0.7;

    double wavenumber() const { return 2.0 * std::numbers::pi / wavelength; }
    double waist_radius() const { return wavelength / (std::numbers::pi * divergence); }
    double peak_irradiance() const {
        const double w0 = waist_radius();
        return transmit_power / (std::numbers::pi * w0 * w0);
    }

    void validate() const {
        require(wavelength > 0.0, "beam: wavelength must be > 0");
        require(divergence > 0.0, "beam: divergence must be > 0");
        require(transmit_power > 0.0, "beam: transmit power must be > 0");
        require(phase_front_radius != 0.0, "beam: phase-front radius must be non-zero");
        require(atmospheric_transmittance > 0.0 && atmospheric_transmittance <= 1.0,
                "beam: atmospheric transmittance must lie in (0, 1]");
    }
};

/// C_n^2(h) of the Hufnagel-Valley model.
inline double cn2_profile(double h, const TurbulenceProfile& profile) {
    if (h < 0.0) {
        throw DomainError("cn2_profile: altitude must be >= 0");
    }
    const double w = profile.high_altitude_wind / 27.0;
    return 0.00594 * w * w * std::pow(h * 1e-5, 10) * std::exp(-h / 1000.0) +
           2.7e-16 * std::exp(-h / 1500.0) + profile.ground_cn2 * std::exp(-h / 100.0);
}

namespace detail {

inline numerics::QuadratureSpec profile_quadrature() { return {1e-11, 20000, 0.0}; }

// Altitude breakpoints that bracket the three profile layers.
inline std::vector<double> altitude_breakpoints(double top) {
    std::vector<double> points{0.0};
    for (double h : {50.0, 300.0, 1500.0, 5000.0, 20000.0, 60000.0}) {
        if (h < top) {
            points.push_back(h);
        }
    }
    points.push_back(top);
    return points;
}

inline std::vector<double> unit_breakpoints(double top) {
    auto points = altitude_breakpoints(top);
    for (auto& p : points) {
        p /= top;
    }
    points.back() = 1.0;
    return points;
}

inline double outer_scale_factor(const TurbulenceProfile& profile) {
    const double kappa0 = 2.0 * std::numbers::pi / profile.outer_scale;
    return 1.0 - 0.715 * std::cbrt(kappa0);
}

} // namespace detail

/// Squared spherical-wave coherence radius along the slant path. Infinite when
/// the profile carries no turbulence.
inline double coherence_radius_sq(const BeamParams& beam, const LinkGeometry& geom,
                                  const TurbulenceProfile& profile) {
    profile.validate();
    const double k = beam.wavenumber();
    const double length = slant_path_length(geom);
    const double height = geom.altitude;
    const auto points = detail::unit_breakpoints(height);
    const double integral = numerics::adaptive_integrate_detailed(
                                [&](double xi) {
                                    return std::pow(1.0 - xi, 5.0 / 3.0) * cn2_profile(xi * height, profile);
                                },
                                points, detail::profile_quadrature())
                                .value;
    if (integral <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return std::pow(1.46 * k * k * length * integral, -6.0 / 5.0) / detail::outer_scale_factor(profile);
}

/// Long-term (turbulence-broadened) Gaussian spot radius W_Lt at the end of the slant path.
inline double long_term_spot_radius(const BeamParams& beam, const LinkGeometry& geom,
                                    const TurbulenceProfile& profile) {
    beam.validate();
    const double k = beam.wavenumber();
    const double w0 = beam.waist_radius();
    const double length = slant_path_length(geom);
    const double focus = std::isinf(beam.phase_front_radius) ? 0.0 : length / beam.phase_front_radius;
    const double rho_sq = coherence_radius_sq(beam, geom, profile);
    const double diffraction = length * length / (k * k * w0 * w0 * w0 * w0);
    const double turbulence = std::isinf(rho_sq) ? 0.0 : 4.0 * length * length / (k * k * w0 * w0 * rho_sq);
    return w0 * std::sqrt((focus - 1.0) * (focus - 1.0) + diffraction + turbulence);
}

enum class GridKind { mean, instantaneous };

/// m x m irradiance samples over the square receiving plane above the sea
/// surface, centred on the beam axis. Row-major, row 0 / column 0 at the
/// (-half_width, -half_width) corner.
struct IrradianceGrid {
    int m = 0;
    double cell_size = 0.0;
    double half_width = 0.0;
    std::vector<double> values;
    GridKind kind = GridKind::mean;
    double transmittance = 1.0; // xi_t folded into values (instantaneous grids)

    std::size_t cells() const { return values.size(); }
    double& at(int row, int col) { return values[static_cast<std::size_t>(row) * m + col]; }
    double at(int row, int col) const { return values[static_cast<std::size_t>(row) * m + col]; }
    double center_x(int col) const { return cell_size * (col + 0.5) - half_width; }
    double center_y(int row) const { return cell_size * (row + 0.5) - half_width; }

    /// Power intercepted by the plane, sum(values) * cell area.
    double total_power() const {
        double sum = 0.0;
        for (double v : values) {
            sum += v;
        }
        return sum * cell_size * cell_size;
    }
};

/// Gaussian mean irradiance sampled at cell centres over a plane of side 2 W_Lt.
inline IrradianceGrid mean_irradiance_grid(const BeamParams& beam, double spot_radius, int m) {
    require(m >= 1, "mean_irradiance_grid: m must be >= 1");
    require(spot_radius > 0.0, "mean_irradiance_grid: spot radius must be > 0");
    const double w0 = beam.waist_radius();
    const double peak = beam.peak_irradiance() * w0 * w0 / (spot_radius * spot_radius);
    IrradianceGrid grid;
    grid.m = m;
    grid.half_width = spot_radius;
    grid.cell_size = 2.0 * spot_radius / m;
    grid.values.resize(static_cast<std::size_t>(m) * m);
    grid.kind = GridKind::mean;
    for (int row = 0; row < m; ++row) {
        for (int col = 0; col < m; ++col) {
            const double x = grid.center_x(col);
            const double y = grid.center_y(row);
            grid.at(row, col) = peak * std::exp(-(x * x + y * y) / (spot_radius * spot_radius));
        }
    }
    return grid;
}

/// Rytov variance for the slant downlink,
/// 2.25 k^(7/6) sec^(11/6)(zenith) * integral_0^H C_n^2(h) h^(5/6) dh.
inline double slant_rytov_variance(const LinkGeometry& geom, const TurbulenceProfile& profile, double k) {
    profile.validate();
    const auto points = detail::altitude_breakpoints(geom.altitude);
    const double integral = numerics::adaptive_integrate_detailed(
                                [&](double h) { return cn2_profile(h, profile) * std::pow(h, 5.0 / 6.0); },
                                points, detail::profile_quadrature())
                                .value;
    return 2.25 * std::pow(k, 7.0 / 6.0) * std::pow(1.0 / std::cos(geom.zenith), 11.0 / 6.0) * integral;
}

/// Large- and small-scale log-amplitude parameters driven by a Rytov variance.
struct ScintillationScales {
    double eta_x = 0.0;
    double eta_y = 0.0;
    double sigma_ln_x_sq = 0.0;
    double sigma_ln_y_sq = 0.0;
};

inline ScintillationScales scintillation_scales(double rytov) {
    const double p = std::pow(rytov, 6.0 / 5.0);
    ScintillationScales s;
    s.eta_x = 0.92 / (1.0 + 1.11 * p);
    s.eta_y = 3.0 * (1.0 + 0.69 * p);
    s.sigma_ln_x_sq = 0.49 * rytov / std::pow(1.0 + 1.11 * p, 7.0 / 6.0);
    s.sigma_ln_y_sq = 0.51 * rytov / std::pow(1.0 + 0.69 * p, 5.0 / 6.0);
    return s;
}

/// 0.99 x^(5/12) K_{5/6}(sqrt(x)), continuous at x = 0.
inline double small_scale_correlation(double x) {
    constexpr double nu = 5.0 / 6.0;
    if (x <= 0.0) {
        // K_nu(y) ~ Gamma(nu)/2 (2/y)^nu as y -> 0.
        return 0.99 * std::tgamma(nu) * std::pow(2.0, nu - 1.0);
    }
    return 0.99 * std::pow(x, 5.0 / 12.0) * numerics::bessel_k(nu, std::sqrt(x));
}

/// Spatial covariance model of the turbulent fading over the receiving plane
/// of a satellite downlink. Evaluates B(rho) and its log-domain counterpart.
class FadingCorrelation {
public:
    FadingCorrelation(const LinkGeometry& geom, const TurbulenceProfile& profile, double k)
        : geom_(geom), profile_(profile), k_(k), length_(slant_path_length(geom)) {
        rytov_ = slant_rytov_variance(geom, profile, k);
        scales_ = scintillation_scales(rytov_);
        if (rytov_ > 0.0) {
            mu0_ = mu4d(0.0);
        }
    }

    double rytov() const { return rytov_; }
    const ScintillationScales& scales() const { return scales_; }

    /// Per-cell log variance sigma^2_{ln xi_f} = sigma^2_{lnX} + sigma^2_{lnY}.
    double log_variance() const { return scales_.sigma_ln_x_sq + scales_.sigma_ln_y_sq; }

    /// mu_4d(rho) weighting integral of the large-scale covariance.
    double mu4d(double rho) const {
        const double height = geom_.altitude;
        const double scale = k_ * rho * rho * scales_.eta_x / (8.0 * length_);
        const auto points = detail::unit_breakpoints(height);
        auto integrand = [&](double xi) {
            const double taper = 1.0 - 0.625 * xi;
            const double base = cn2_profile(xi * height, profile_) / (std::cbrt(xi) * std::pow(taper, 1.4));
            if (scale == 0.0) {
                return base;
            }
            const double z = -scale / (std::pow(xi, 5.0 / 3.0) * taper);
            return base * numerics::hyp1f1(1.4, 1.0, z);
        };
        return numerics::adaptive_integrate_detailed(integrand, points, {1e-10, 20000, 0.0}).value;
    }

    /// B_lnX(rho) + B_lnY(rho), which equals ln(1 + B(rho)).
    double log_covariance(double rho) const {
        if (rytov_ <= 0.0) {
            return 0.0;
        }
        if (rho == 0.0) {
            return log_variance();
        }
        const double large = mu4d(rho) / mu0_ * scales_.sigma_ln_x_sq;
        const double x = k_ * rho * rho * scales_.eta_y / length_;
        const double small = small_scale_correlation(x) * scales_.sigma_ln_y_sq;
        return large + small;
    }

    /// Covariance of the unit-mean fading, B(rho) = exp(B_lnX + B_lnY) - 1.
    double covariance(double rho) const { return std::expm1(log_covariance(rho)); }

private:
    LinkGeometry geom_;
    TurbulenceProfile profile_;
    double k_;
    double length_;
    double rytov_ = 0.0;
    double mu0_ = 0.0;
    ScintillationScales scales_;
};

/// M x M covariance of the fading coefficients between the grid cells
/// (intensity domain, cells numbered row-major).
inline Eigen::MatrixXd fading_covariance(const IrradianceGrid& grid, const FadingCorrelation& model) {
    const int m = grid.m;
    // The grid is regular and B depends only on distance: one evaluation per
    // unordered cell offset.
    std::vector<double> by_offset(static_cast<std::size_t>(m) * m, 0.0);
    for (int di = 0; di < m; ++di) {
        for (int dj = di; dj < m; ++dj) {
            const double rho = grid.cell_size * std::hypot(static_cast<double>(di), static_cast<double>(dj));
            const double b = model.covariance(rho);
            by_offset[static_cast<std::size_t>(di) * m + dj] = b;
            by_offset[static_cast<std::size_t>(dj) * m + di] = b;
        }
    }
    const auto cells = static_cast<Eigen::Index>(grid.cells());
    Eigen::MatrixXd cov(cells, cells);
    for (Eigen::Index a = 0; a < cells; ++a) {
        const int ra = static_cast<int>(a / m);
        const int ca = static_cast<int>(a % m);
        for (Eigen::Index b = 0; b <= a; ++b) {
            const int rb = static_cast<int>(b / m);
            const int cb = static_cast<int>(b % m);
            const double v = by_offset[static_cast<std::size_t>(std::abs(ra - rb)) * m + std::abs(ca - cb)];
            cov(a, b) = v;
            cov(b, a) = v;
        }
    }
    return cov;
}

/// One realization of the per-cell fading coefficients.
struct FadingField {
    std::vector<double> xi;        // fading coefficients, > 0
    std::vector<double> sigma_ln;  // per-cell variance of ln xi
};

/// Correlated lognormal sampler. Factorizes the log-domain covariance
/// ln(1 + B) once; every draw costs one triangular matrix-vector product.
class FadingSampler {
public:
    FadingSampler(const Eigen::MatrixXd& covariance, std::vector<double> sigma_ln)
        : sigma_ln_(std::move(sigma_ln)) {
        const Eigen::Index n = covariance.rows();
        if (covariance.cols() != n || static_cast<std::size_t>(n) != sigma_ln_.size()) {
            throw DomainError("FadingSampler: covariance and sigma_ln sizes differ");
        }
        Eigen::MatrixXd log_cov(n, n);
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = 0; b < n; ++b) {
                const double sym = 0.5 * (covariance(a, b) + covariance(b, a));
                if (!(sym > -1.0)) {
                    throw NumericError("FadingSampler: covariance entry <= -1 has no lognormal image");
                }
                log_cov(a, b) = std::log1p(sym);
            }
        }
        const double max_diag = n > 0 ? log_cov.diagonal().maxCoeff() : 0.0;
        if (max_diag <= 0.0) {
            zero_ = true;
            return;
        }
        llt_.compute(log_cov);
        double jitter = 1e-10 * max_diag;
        while (llt_.info() != Eigen::Success) {
            if (jitter > 1e-6 * max_diag * (1.0 + 1e-9)) {
                throw NumericError("FadingSampler: covariance is not positive semi-definite after jitter");
            }
            log_cov.diagonal().array() += jitter - applied_jitter_;
            llt_.compute(log_cov);
            applied_jitter_ = jitter;
            jitter *= 10.0;
        }
    }

    std::size_t size() const { return sigma_ln_.size(); }
    double applied_jitter() const { return applied_jitter_; }
    /// Lower Cholesky factor of the (jittered) log-domain covariance.
    Eigen::MatrixXd factor() const {
        const auto n = static_cast<Eigen::Index>(sigma_ln_.size());
        if (zero_) {
            return Eigen::MatrixXd::Zero(n, n);
        }
        return llt_.matrixL();
    }

    FadingField draw(numerics::RngStream& rng) const {
        const auto n = static_cast<Eigen::Index>(sigma_ln_.size());
        Eigen::VectorXd normal(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            normal[i] = rng.normal();
        }
        Eigen::VectorXd correlated = Eigen::VectorXd::Zero(n);
        if (!zero_) {
            correlated = llt_.matrixL() * normal;
        }
        FadingField field;
        field.sigma_ln = sigma_ln_;
        field.xi.resize(sigma_ln_.size());
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            field.xi[idx] = std::exp(correlated[i] - 0.5 * sigma_ln_[idx]);
        }
        return field;
    }

private:
    std::vector<double> sigma_ln_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    bool zero_ = false;
    double applied_jitter_ = 0.0;
};

/// Single draw of the fading field (convenience wrapper over FadingSampler).
inline FadingField sample_fading_field(const Eigen::MatrixXd& covariance, const std::vector<double>& sigma_ln,
                                       numerics::RngStream& rng) {
    return FadingSampler(covariance, sigma_ln).draw(rng);
}

/// I = <I> xi_t xi_f cell by cell.
inline IrradianceGrid instantaneous_irradiance(const IrradianceGrid& mean_grid, const FadingField& fading,
                                               double transmittance) {
    if (fading.xi.size() != mean_grid.cells()) {
        throw DomainError("instantaneous_irradiance: fading field does not match the grid");
    }
    IrradianceGrid out = mean_grid;
    out.kind = GridKind::instantaneous;
    out.transmittance = transmittance;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = mean_grid.values[i] * transmittance * fading.xi[i];
    }
    return out;
}

} // namespace stulc::atmosphere

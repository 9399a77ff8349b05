#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "stulc/atmosphere.hpp"

using namespace stulc;
using namespace stulc::atmosphere;

namespace {

constexpr double deg = std::numbers::pi / 180.0;
const double k532 = 2.0 * std::numbers::pi / 532e-9;

// Hufnagel-Valley written out again, independently of cn2_profile.
double hv(double h, double c0) {
    const double a = 0.00594 * (21.0 / 27.0) * (21.0 / 27.0);
    return a * std::pow(1e-5 * h, 10.0) * std::exp(-h / 1000.0) + 2.7e-16 * std::exp(-h / 1500.0) +
           c0 * std::exp(-h / 100.0);
}

double ks_normal(std::vector<double> x, double mean, double sd) {
    std::sort(x.begin(), x.end());
    double d = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = 0.5 * std::erfc(-(x[i] - mean) / (sd * std::numbers::sqrt2));
        d = std::max({d, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
    }
    return d;
}

} // namespace

TEST(Cn2Profile, GroundValue) { EXPECT_NEAR(cn2_profile(0.0, TurbulenceProfile::weak()), 2.87e-16, 1e-30); }

TEST(Cn2Profile, VanishesAloft) { EXPECT_LT(cn2_profile(1e6, TurbulenceProfile::weak()), 1e-30); }

TEST(Cn2Profile, IndependentReevaluation) {
    EXPECT_NEAR(cn2_profile(1e4, TurbulenceProfile::weak()) / hv(1e4, 1.7e-17), 1.0, 1e-12);
    EXPECT_NEAR(cn2_profile(1e4, TurbulenceProfile::weak()) / 1.66573192210146517e-17, 1.0, 1e-12);
}

TEST(Cn2Profile, NonNegativeEverywhere) {
    for (double h = 0.0; h < 1e5; h += 37.0) {
        ASSERT_GE(cn2_profile(h, TurbulenceProfile::strong()), 0.0);
    }
    EXPECT_THROW(cn2_profile(-1.0, TurbulenceProfile::weak()), DomainError);
}

TEST(TurbulenceProfile, OuterScaleMustKeepFactorPositive) {
    TurbulenceProfile p = TurbulenceProfile::weak();
    p.outer_scale = 1.0;
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Beam, WaistAndPeak) {
    const BeamParams b;
    EXPECT_NEAR(b.waist_radius(), 532e-9 / (std::numbers::pi * 22e-6), 1e-18);
    EXPECT_NEAR(b.peak_irradiance() * std::numbers::pi * b.waist_radius() * b.waist_radius(), 5.0, 1e-12);
}

TEST(SpotRadius, WeakDefaultRegression) {
    // Independent mpmath quadrature of the same expression.
    const auto g = geometry_from_zenith(200e3, 10.0, 0.0);
    const double w = long_term_spot_radius(BeamParams{}, g, TurbulenceProfile::weak());
    EXPECT_NEAR(w / 2.22705746591677294, 1.0, 1e-8);
    const BeamParams b;
    const double vacuum = b.waist_radius() * std::sqrt(1.0 + std::pow(200e3 / (k532 * std::pow(b.waist_radius(), 2)), 2));
    EXPECT_NEAR(vacuum, 2.20001346555170908, 1e-9);
    EXPECT_GE(w, vacuum);
}

TEST(SpotRadius, StrongPresetRegression) {
    const auto g = geometry_from_zenith(200e3, 10.0, 0.0);
    EXPECT_NEAR(long_term_spot_radius(BeamParams{}, g, TurbulenceProfile::strong()) / 3.60224712808483429, 1.0, 1e-8);
}

TEST(SpotRadius, VacuumLimitOfTurbulenceTerm) {
    // W_Lt^2 - W_vac^2 = 4 L^2 / (k^2 W0^2 rho0^2) exactly.
    const auto g = geometry_from_zenith(200e3, 10.0, 20.0 * deg);
    const BeamParams b;
    const auto p = TurbulenceProfile::weak();
    const double w0 = b.waist_radius();
    const double l = slant_path_length(g);
    const double w = long_term_spot_radius(b, g, p);
    const double vac_sq = w0 * w0 * (1.0 + l * l / (k532 * k532 * std::pow(w0, 4)));
    const double turb = 4.0 * l * l / (k532 * k532 * w0 * w0 * coherence_radius_sq(b, g, p));
    EXPECT_NEAR(w * w, vac_sq + w0 * w0 * turb, 1e-12 * w * w);
}

TEST(SpotRadius, OuterScaleEntersOnlyThroughFactor) {
    const auto g = geometry_from_zenith(200e3, 10.0, 0.0);
    const BeamParams b;
    auto p = TurbulenceProfile::weak();
    const double rho_a = coherence_radius_sq(b, g, p);
    p.outer_scale = 20.0;
    const double rho_b = coherence_radius_sq(b, g, p);
    const auto factor = [](double l0) { return 1.0 - 0.715 * std::cbrt(2.0 * std::numbers::pi / l0); };
    EXPECT_NEAR(rho_b / rho_a, factor(10.0) / factor(20.0), 1e-12);
}

TEST(MeanGrid, CenterAndEdgeValues) {
    const BeamParams b;
    const double w = 2.0;
    // odd m puts a cell centre on the axis
    const auto g = mean_irradiance_grid(b, w, 41);
    const double peak = b.peak_irradiance() * std::pow(b.waist_radius() / w, 2);
    EXPECT_NEAR(g.at(20, 20), peak, 1e-12 * peak);
    EXPECT_DOUBLE_EQ(g.half_width, w);
    EXPECT_DOUBLE_EQ(g.cell_size, 2.0 * w / 41);
    // r = W_Lt: the continuous profile is peak / e there.
    const double r = w;
    EXPECT_NEAR(peak * std::exp(-r * r / (w * w)), peak / std::numbers::e, 1e-15);
    for (double v : g.values) {
        ASSERT_GE(v, 0.0);
    }
}

TEST(MeanGrid, ContinuousProfileCarriesTransmitPower) {
    const BeamParams b;
    for (double w : {0.5, 2.2, 3.6}) {
        const double peak = b.peak_irradiance() * std::pow(b.waist_radius() / w, 2);
        EXPECT_NEAR(peak * std::numbers::pi * w * w, b.transmit_power, 1e-12 * b.transmit_power);
    }
}

TEST(MeanGrid, DiscreteSumConvergesToCoverage) {
    const BeamParams b;
    const double coverage = std::pow(std::erf(1.0), 2) * b.transmit_power;
    double last_err = 1e300;
    for (int m : {10, 40, 160}) {
        const auto g = mean_irradiance_grid(b, 2.2, m);
        EXPECT_LE(g.total_power(), b.transmit_power);
        const double err = std::abs(g.total_power() - coverage);
        EXPECT_LT(err, last_err);
        last_err = err;
    }
    EXPECT_LT(last_err / coverage, 1e-4);
}

TEST(SlantRytov, WeakNadirOracle) {
    const auto g = geometry_from_zenith(200e3, 10.0, 0.0);
    const double v = slant_rytov_variance(g, TurbulenceProfile::weak(), k532);
    EXPECT_NEAR(v / 0.18897066358567289, 1.0, 1e-6);
    // dense trapezoid per profile layer
    double integral = 0.0;
    const std::vector<double> cuts{0.0, 300.0, 1500.0, 5000.0, 20000.0, 60000.0, 200e3};
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const long n = 200000;
        const double h = (cuts[i + 1] - cuts[i]) / n;
        double s = 0.0;
        for (long j = 0; j <= n; ++j) {
            const double x = cuts[i] + h * j;
            s += (j == 0 || j == n ? 0.5 : 1.0) * hv(x, 1.7e-17) * std::pow(x, 5.0 / 6.0);
        }
        integral += s * h;
    }
    EXPECT_NEAR(v / (2.25 * std::pow(k532, 7.0 / 6.0) * integral), 1.0, 1e-6);
}

TEST(SlantRytov, AngleRatioIsSecPower) {
    const auto p = TurbulenceProfile::weak();
    const double base = slant_rytov_variance(geometry_from_zenith(200e3, 10.0, 0.0), p, k532);
    EXPECT_NEAR(slant_rytov_variance(geometry_from_zenith(200e3, 10.0, 60.0 * deg), p, k532) / base,
                std::pow(2.0, 11.0 / 6.0), 1e-9);
    for (double z : {10.0, 25.0, 45.0}) {
        EXPECT_NEAR(slant_rytov_variance(geometry_from_zenith(200e3, 10.0, z * deg), p, k532) / base,
                    std::pow(1.0 / std::cos(z * deg), 11.0 / 6.0), 1e-9);
    }
}

TEST(SlantRytov, IncreasingInGroundCn2AndZenith) {
    const auto g0 = geometry_from_zenith(200e3, 10.0, 0.0);
    double last = 0.0;
    for (double c0 : {1e-18, 1.7e-17, 1e-15, 1.7e-13}) {
        const double v = slant_rytov_variance(g0, {c0, 21.0, 10.0}, k532);
        EXPECT_GT(v, last);
        last = v;
    }
    last = 0.0;
    for (double z = 0.0; z < 70.0; z += 10.0) {
        const double v = slant_rytov_variance(geometry_from_zenith(200e3, 10.0, z * deg), TurbulenceProfile::weak(), k532);
        EXPECT_GT(v, last);
        last = v;
    }
}

TEST(SmallScaleCorrelation, ContinuousAtZero) {
    EXPECT_NEAR(small_scale_correlation(1e-12), small_scale_correlation(0.0), 1e-5);
    EXPECT_NEAR(small_scale_correlation(0.0), 0.99 * std::tgamma(5.0 / 6.0) * std::pow(2.0, -1.0 / 6.0), 1e-15);
}

TEST(FadingCovariance, DiagonalAndLimits) {
    const auto g = geometry_from_zenith(200e3, 10.0, 0.0);
    const FadingCorrelation model(g, TurbulenceProfile::weak(), k532);
    const auto& s = model.scales();
    EXPECT_DOUBLE_EQ(model.covariance(0.0), std::expm1(s.sigma_ln_x_sq + s.sigma_ln_y_sq));
    EXPECT_LT(std::abs(model.covariance(500.0)), 1e-6);
    EXPECT_GT(model.covariance(0.01), model.covariance(0.1));
}

TEST(FadingCovariance, SymmetricMatrix) {
    const auto g = geometry_from_zenith(200e3, 10.0, 0.0);
    const FadingCorrelation model(g, TurbulenceProfile::weak(), k532);
    const auto grid = mean_irradiance_grid(BeamParams{}, 2.2, 6);
    const auto cov = fading_covariance(grid, model);
    EXPECT_EQ((cov - cov.transpose()).cwiseAbs().maxCoeff(), 0.0);
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
        EXPECT_DOUBLE_EQ(cov(i, i), model.covariance(0.0));
    }
    // spot-check an off-diagonal entry against a direct evaluation
    const double rho = std::hypot(grid.center_x(4) - grid.center_x(1), grid.center_y(3) - grid.center_y(0));
    EXPECT_NEAR(cov(0 * 6 + 1, 3 * 6 + 4), model.covariance(rho), 1e-14);
}

TEST(FadingSampler, ZeroCovarianceGivesUnitField) {
    numerics::RngStream rng(1, 0);
    const auto f = sample_fading_field(Eigen::MatrixXd::Zero(4, 4), std::vector<double>(4, 0.0), rng);
    for (double x : f.xi) {
        EXPECT_EQ(x, 1.0);
    }
}

TEST(FadingSampler, SingleCellUnitMean) {
    const double s2 = 0.04;
    Eigen::MatrixXd cov(1, 1);
    cov(0, 0) = std::expm1(s2);
    const FadingSampler sampler(cov, {s2});
    numerics::RngStream rng(2, 0);
    const int n = 100000;
    double sum = 0.0;
    double sum2 = 0.0;
    std::vector<double> logs;
    for (int i = 0; i < n; ++i) {
        const double x = sampler.draw(rng).xi[0];
        ASSERT_GT(x, 0.0);
        sum += x;
        sum2 += x * x;
        logs.push_back(std::log(x));
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    EXPECT_NEAR(mean, 1.0, 3.0 * sd / std::sqrt(n));
    // KS at 1%: critical value 1.628 / sqrt(n)
    EXPECT_LT(ks_normal(logs, -0.5 * s2, std::sqrt(s2)), 1.628 / std::sqrt(n));
}

TEST(FadingSampler, TwoCellCorrelation) {
    const double s2 = 0.1;
    Eigen::MatrixXd cov(2, 2);
    cov << std::expm1(s2), std::expm1(0.9 * s2), std::expm1(0.9 * s2), std::expm1(s2);
    const FadingSampler sampler(cov, {s2, s2});
    numerics::RngStream rng(3, 0);
    const int n = 100000;
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (int i = 0; i < n; ++i) {
        const auto f = sampler.draw(rng);
        const double a = std::log(f.xi[0]);
        const double b = std::log(f.xi[1]);
        sa += a;
        sb += b;
        saa += a * a;
        sbb += b * b;
        sab += a * b;
    }
    const double ca = saa / n - (sa / n) * (sa / n);
    const double cb = sbb / n - (sb / n) * (sb / n);
    const double cab = sab / n - (sa / n) * (sb / n);
    EXPECT_NEAR(cab / std::sqrt(ca * cb), 0.9, 0.02);
}

TEST(FadingSampler, JitterRepairsSemidefinite) {
    // Rank-one log covariance: LLT fails without the diagonal jitter.
    Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(3, 3, std::expm1(0.2));
    const FadingSampler sampler(cov, {0.2, 0.2, 0.2});
    EXPECT_GT(sampler.applied_jitter(), 0.0);
    EXPECT_LE(sampler.applied_jitter(), 1e-6 * 0.2 * (1 + 1e-9));
}

TEST(FadingSampler, IndefiniteMatrixFails) {
    Eigen::MatrixXd cov(2, 2);
    cov << 0.1, 0.5, 0.5, 0.1;
    EXPECT_THROW(FadingSampler(cov, {0.1, 0.1}), NumericError);
}

TEST(FadingSampler, GridFieldMarginalKs) {
    const auto g = geometry_from_zenith(200e3, 10.0, 0.0);
    const FadingCorrelation model(g, TurbulenceProfile::weak(), k532);
    const auto grid = mean_irradiance_grid(BeamParams{}, 2.2, 8);
    const FadingSampler sampler(fading_covariance(grid, model), std::vector<double>(grid.cells(), model.log_variance()));
    numerics::RngStream rng(4, 0);
    const int n = 100000;
    std::vector<double> logs;
    logs.reserve(n);
    for (int i = 0; i < n; ++i) {
        logs.push_back(std::log(sampler.draw(rng).xi[27]));
    }
    const double s2 = model.log_variance();
    EXPECT_LT(ks_normal(logs, -0.5 * s2, std::sqrt(s2)), 1.628 / std::sqrt(n));
}

TEST(InstantaneousIrradiance, IdentityAndScaling) {
    const auto grid = mean_irradiance_grid(BeamParams{}, 2.2, 5);
    FadingField unit{std::vector<double>(grid.cells(), 1.0), std::vector<double>(grid.cells(), 0.0)};
    const auto same = instantaneous_irradiance(grid, unit, 1.0);
    EXPECT_EQ(same.values, grid.values);
    EXPECT_EQ(same.kind, GridKind::instantaneous);
    const auto scaled = instantaneous_irradiance(grid, unit, 0.7);
    for (std::size_t i = 0; i < grid.cells(); ++i) {
        EXPECT_DOUBLE_EQ(scaled.values[i], 0.7 * grid.values[i]);
    }
}

TEST(InstantaneousIrradiance, EnsembleMeanMatchesMeanGrid) {
    const auto g = geometry_from_zenith(200e3, 10.0, 0.0);
    const FadingCorrelation model(g, TurbulenceProfile::strong(), k532);
    const auto grid = mean_irradiance_grid(BeamParams{}, 3.6, 5);
    const FadingSampler sampler(fading_covariance(grid, model), std::vector<double>(grid.cells(), model.log_variance()));
    numerics::RngStream rng(5, 0);
    const int n = 10000;
    std::vector<double> sum(grid.cells(), 0.0);
    std::vector<double> sum2(grid.cells(), 0.0);
    for (int i = 0; i < n; ++i) {
        const auto inst = instantaneous_irradiance(grid, sampler.draw(rng), 0.7);
        for (std::size_t c = 0; c < grid.cells(); ++c) {
            ASSERT_GE(inst.values[c], 0.0);
            sum[c] += inst.values[c];
            sum2[c] += inst.values[c] * inst.values[c];
        }
    }
    for (std::size_t c = 0; c < grid.cells(); ++c) {
        const double mean = sum[c] / n;
        const double se = std::sqrt((sum2[c] / n - mean * mean) / n);
        EXPECT_NEAR(mean, 0.7 * grid.values[c], 3.5 * se) << c;
    }
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "stulc/atmosphere.hpp"
#include "stulc/underwater.hpp"

using namespace stulc;
using namespace stulc::underwater;

namespace {
const double k532 = 2.0 * std::numbers::pi / 532e-9;
}

TEST(WaterOptics, Presets) {
    EXPECT_DOUBLE_EQ(WaterOptics::clear().k_e(), 0.149);
    EXPECT_NEAR(WaterOptics::coastal().k_e(), 0.304, 1e-15);
    EXPECT_DOUBLE_EQ(WaterOptics::coastal().g, 0.9470);
    WaterOptics bad{0.1, 0.1, 1.0};
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(StepSampler, ExponentialMoments) {
    numerics::RngStream rng(1, 0);
    const double ke = WaterOptics::clear().k_e();
    const int n = 100000;
    double s = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = sample_step(ke, rng);
        ASSERT_GT(d, 0.0);
        s += d;
        s2 += d * d;
    }
    const double mean = s / n;
    EXPECT_NEAR(1.0 / ke, 6.711409395973154, 1e-12);
    EXPECT_NEAR(mean, 1.0 / ke, 3.0 / (ke * std::sqrt(n)));
    EXPECT_NEAR((s2 / n - mean * mean) * ke * ke, 1.0, 0.03);
    EXPECT_DOUBLE_EQ(-std::log(std::exp(-1.0)) / ke, 1.0 / ke);
}

TEST(HgPhase, NormalizedPerSteradian) {
    for (double g : {0.0, 0.5, 0.8708, 0.947}) {
        const double total = numerics::adaptive_integrate(
            [&](double mu) { return 2.0 * std::numbers::pi * hg_phase(g, mu); }, -1.0, 1.0, {1e-10, 2000, 0.0});
        EXPECT_NEAR(total, 1.0, 1e-9) << g;
    }
}

TEST(HgSampler, IsotropicLimit) {
    numerics::RngStream rng(2, 0);
    const int n = 100000;
    std::vector<int> bins(10, 0);
    for (int i = 0; i < n; ++i) {
        const double mu = std::cos(sample_hg_angle(0.0, rng));
        ++bins[static_cast<std::size_t>(std::min(9.0, (mu + 1.0) * 5.0))];
    }
    double chi2 = 0.0;
    for (int b : bins) chi2 += (b - n / 10.0) * (b - n / 10.0) / (n / 10.0);
    EXPECT_LT(chi2, 21.67); // 1% critical value, 9 dof
}

TEST(HgSampler, MeanCosineIsG) {
    for (double g : {0.8708, 0.947}) {
        numerics::RngStream rng(3, 0);
        const int n = 100000;
        double s = 0.0;
        double s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double mu = std::cos(sample_hg_angle(g, rng));
            s += mu;
            s2 += mu * mu;
        }
        const double mean = s / n;
        EXPECT_NEAR(mean, g, 3.0 * std::sqrt((s2 / n - mean * mean) / n)) << g;
    }
}

TEST(HgSampler, HistogramMatchesDensity) {
    const double g = 0.8708;
    numerics::RngStream rng(4, 0);
    const int n = 1000000;
    constexpr int bins = 200;
    std::vector<double> counts(bins, 0.0);
    for (int i = 0; i < n; ++i) {
        const double mu = std::cos(sample_hg_angle(g, rng));
        counts[static_cast<std::size_t>(std::min(bins - 1.0, (mu + 1.0) / 2.0 * bins))] += 1.0;
    }
    // Bin masses of the cos-theta density (1-g^2) / (2 (1+g^2-2g mu)^1.5) in closed form.
    const auto cdf = [&](double mu) { return (1.0 - g * g) / (2.0 * g) * (1.0 / std::sqrt(1.0 + g * g - 2.0 * g * mu) - 1.0 / (1.0 + g)); };
    double l1 = 0.0;
    for (int b = 0; b < bins; ++b) {
        const double lo = -1.0 + 2.0 * b / bins;
        const double hi = lo + 2.0 / bins;
        l1 += std::abs(counts[static_cast<std::size_t>(b)] / n - (cdf(hi) - cdf(lo)));
    }
    EXPECT_NEAR(cdf(1.0), 1.0, 1e-12);
    EXPECT_LT(l1, 0.02);
}

TEST(Rotate, ZeroAngleIsIdentity) {
    const Vec3 mu = normalized({0.3, -0.4, 0.5});
    const Vec3 out = rotate_direction(mu, 0.0, 1.1);
    EXPECT_NEAR(out.x, mu.x, 1e-15);
    EXPECT_NEAR(out.y, mu.y, 1e-15);
    EXPECT_NEAR(out.z, mu.z, 1e-15);
}

TEST(Rotate, DegenerateBranch) {
    const Vec3 out = rotate_direction({0, 0, -1}, std::numbers::pi / 2, 0.0);
    EXPECT_NEAR(dot(out, {0, 0, -1}), 0.0, 1e-15);
    EXPECT_NEAR(norm(out), 1.0, 1e-15);
}

TEST(Rotate, AngleIdentityOverRandomInputs) {
    numerics::RngStream rng(5, 0);
    for (int i = 0; i < 10000; ++i) {
        const double ct = rng.uniform(-1.0, 1.0);
        const double ph = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double st = std::sqrt(1.0 - ct * ct);
        const Vec3 mu{st * std::cos(ph), st * std::sin(ph), ct};
        const double theta = rng.uniform(0.0, std::numbers::pi);
        const Vec3 out = rotate_direction(mu, theta, rng.uniform(0.0, 2.0 * std::numbers::pi));
        ASSERT_NEAR(std::acos(std::clamp(dot(mu, out), -1.0, 1.0)), theta, 1e-7);
        ASSERT_NEAR(dot(mu, out), std::cos(theta), 1e-10);
    }
}

TEST(Rotate, NormDriftOverMillionRotations) {
    numerics::RngStream rng(6, 0);
    Vec3 mu{0.0, 0.0, -1.0};
    double worst = 0.0;
    for (int i = 0; i < 1000000; ++i) {
        mu = rotate_direction(mu, sample_hg_angle(0.8708, rng), 2.0 * std::numbers::pi * rng.uniform());
        worst = std::max(worst, std::abs(norm(mu) - 1.0));
    }
    EXPECT_LT(worst, 1e-9);
}

TEST(OceanicSpectrum, ZeroWithoutTemperatureDissipation) {
    EXPECT_EQ(oceanic_spectrum(10.0, OceanTurbulence::none()), 0.0);
    EXPECT_EQ(underwater_rytov(5.0, OceanTurbulence::none(), k532), 0.0);
    EXPECT_GT(oceanic_spectrum(10.0, OceanTurbulence::weak()), 0.0);
}

TEST(UnderwaterRytov, ShortPathLimit) {
    // Fresnel scale far below the Kolmogorov scale: 1 - cos ~ x^2 / 2, so L^3.
    const auto t = OceanTurbulence::weak();
    const double a = underwater_rytov(1e-3, t, k532);
    EXPECT_LT(a, 1e-7 * underwater_rytov(1.0, t, k532));
    EXPECT_NEAR(underwater_rytov(2e-3, t, k532) / a, 8.0, 0.08);
}

TEST(UnderwaterRytov, DenseDoubleSumOracle) {
    // 2000 x 2000 nodes: trapezoid in ln(kappa), midpoint in xi, of the
    // undoubled integrand kappa Phi(kappa) (1 - cos(L kappa^2 xi / k)).
    const auto t = OceanTurbulence::weak();
    const double l = 5.0;
    const int nk = 2000;
    const int nx = 2000;
    const double lo = std::log(1e-3);
    const double hi = std::log(1e3 / t.kolmogorov_scale);
    const double du = (hi - lo) / (nk - 1);
    double sum = 0.0;
    for (int i = 0; i < nk; ++i) {
        const double kappa = std::exp(lo + du * i);
        const double w = (i == 0 || i == nk - 1) ? 0.5 : 1.0;
        const double a = l * kappa * kappa / k532;
        double inner = 0.0;
        for (int j = 0; j < nx; ++j) {
            inner += 1.0 - std::cos(a * (j + 0.5) / nx);
        }
        sum += w * kappa * kappa * oceanic_spectrum(kappa, t) * inner / nx;
    }
    const double oracle = 8.0 * std::numbers::pi * std::numbers::pi * k532 * k532 * l * sum * du;
    EXPECT_NEAR(underwater_rytov(l, t, k532) / oracle, 1.0, 0.01);
}

TEST(UnderwaterRytov, IncreasingInLength) {
    for (const auto& t : {OceanTurbulence::weak(), OceanTurbulence::strong()}) {
        const double a = underwater_rytov(1.0, t, k532);
        const double b = underwater_rytov(5.0, t, k532);
        const double c = underwater_rytov(10.0, t, k532);
        EXPECT_GT(b, a);
        EXPECT_GT(c, b);
    }
}

TEST(RytovTable, InterpolationWithinHalfPercent) {
    for (const auto& t : {OceanTurbulence::weak(), OceanTurbulence::strong()}) {
        const RytovTable table(t, k532);
        numerics::RngStream rng(7, 0);
        for (int i = 0; i < 60; ++i) {
            const double d = std::exp(rng.uniform(std::log(0.01), std::log(200.0)));
            EXPECT_NEAR(table(d) / underwater_rytov(d, t, k532), 1.0, 5e-3) << d;
        }
    }
}

TEST(ScintillationMoment, Values) {
    EXPECT_EQ(scintillation_moment(0.0), 1.0);
    EXPECT_NEAR(scintillation_moment(0.1), 1.1051709180756477, 1e-15);
    const double s = 4.0;
    const double p = std::pow(s, 1.2);
    const double si = std::exp(0.49 * s / std::pow(1.0 + 1.11 * p, 7.0 / 6.0) +
                               0.51 * s / std::pow(1.0 + 0.69 * p, 5.0 / 6.0)) - 1.0;
    EXPECT_NEAR(scintillation_moment(s), 1.0 + si, 1e-12);
    for (double x = 0.0; x < 20.0; x += 0.25) {
        ASSERT_GE(scintillation_moment(x), 1.0);
    }
}

TEST(ScintillationMoment, SingleLegComposition) {
    for (double s : {0.0, 0.05, 0.3, 1.0}) {
        EXPECT_EQ(path_scintillation({s}), std::exp(s) - 1.0);
    }
    EXPECT_NEAR(path_scintillation({0.1, 0.2}), std::exp(0.3) - 1.0, 1e-15);
}

TEST(Receiver, DefaultsAndSolidAngle) {
    const Receiver rx;
    const Vec3 axis = rx.fov_axis();
    EXPECT_NEAR(axis.z, 1.0, 1e-15);
    EXPECT_NEAR(rx.aperture_area, 1.77e-4, 0.0);
    const double r = rx.aperture_radius();
    EXPECT_NEAR(rx.solid_angle(5.0), 2.0 * std::numbers::pi * (1.0 - 5.0 / std::sqrt(25.0 + r * r)), 1e-18);
    // far field: A / d^2
    EXPECT_NEAR(rx.solid_angle(100.0) / (rx.aperture_area / 1e4), 1.0, 1e-6);
}

TEST(Detection, OutsideFovOrGrazing) {
    const WaterOptics op = WaterOptics::clear();
    Receiver rx;
    rx.fov_half_angle = 10.0 * std::numbers::pi / 180.0;
    Photon p;
    p.scatter_order = 1;
    p.position = {5.0, 0.0, 1.0}; // far off-axis
    EXPECT_EQ(detection_probability(p, rx, op, 0.1), 0.0);
    Receiver wide;
    wide.fov_half_angle = std::numbers::pi;
    p.position = {5.0, 0.0, -0.01}; // behind the aperture plane
    EXPECT_EQ(detection_probability(p, wide, op, 0.1), 0.0);
    p.position = {0.0, 0.0, 0.0};
    EXPECT_THROW(detection_probability(p, wide, op, 0.1), GeometryError);
}

TEST(Detection, FactorProductOracle) {
    const WaterOptics op = WaterOptics::clear();
    const Receiver rx;
    Photon p;
    p.scatter_order = 1;
    p.position = {0.0, 0.0, 5.0};
    p.direction = {0.0, 0.0, -1.0};
    const double theta = 0.0; // aligned
    // Independent composition of the four factors.
    const double r = std::sqrt(1.77e-4 / std::numbers::pi);
    const double omega = 2.0 * std::numbers::pi * (1.0 - 5.0 / std::sqrt(25.0 + r * r));
    const double g = 0.8708;
    const double phase = (1 - g * g) / (4.0 * std::numbers::pi * std::pow(1 + g * g - 2 * g, 1.5));
    const double expected = (0.080 / 0.149) * std::exp(-0.149 * 5.0) * 1.0 * std::min(1.0, phase * omega);
    EXPECT_NEAR(detection_probability(p, rx, op, theta), expected, 1e-15);
}

TEST(Detection, ZeroOrderBranch) {
    const Receiver rx;
    EXPECT_EQ(zero_order_detection(10.0, 0.0, 0.1, 1.0, rx, 0.149), 0.0);
    EXPECT_EQ(zero_order_detection(10.0, 1.0, 0.1, 0.0, rx, 0.149), 0.0);
    const double v = zero_order_detection(10.0, 1.0, 0.05, 3.0, rx, 0.149);
    EXPECT_NEAR(v, std::exp(-1.49) * 3.0 / (2.0 * std::numbers::pi * std::sin(0.05)) * rx.solid_angle(10.0), 1e-15);
    EXPECT_LE(zero_order_detection(1e-3, 1.0, 1e-6, 100.0, rx, 0.149), 1.0);
}

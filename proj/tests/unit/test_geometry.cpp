#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "stulc/geometry.hpp"

using namespace stulc;

namespace {
constexpr double deg = std::numbers::pi / 180.0;
}

TEST(Geometry, ZeroOffsetIsNadir) {
    const auto g = solve_transmit_zenith(200e3, 10.0, 0.0, 0.75);
    EXPECT_EQ(g.zenith, 0.0);
    EXPECT_EQ(g.refracted_zenith, 0.0);
}

TEST(Geometry, RecoversThirtyDegrees) {
    const double offset = 10.0 * std::tan(std::asin(0.75 * std::sin(30.0 * deg))) + 200e3 * std::tan(30.0 * deg);
    const auto g = solve_transmit_zenith(200e3, 10.0, offset, 0.75);
    EXPECT_NEAR(g.zenith, 30.0 * deg, 1e-9);
}

TEST(Geometry, ZeroDepthRemovesUnderwaterLeg) {
    const auto g = solve_transmit_zenith(200e3, 0.0, 200e3 * std::tan(45.0 * deg), 0.75);
    EXPECT_NEAR(g.zenith, 45.0 * deg, 1e-9);
}

TEST(Geometry, SnellAndOffsetInvariants) {
    for (double z = 0.0; z < 70.0; z += 3.7) {
        const auto g = geometry_from_zenith(200e3, 10.0, z * deg);
        EXPECT_NEAR(g.index_ratio * std::sin(g.zenith), std::sin(g.refracted_zenith), 1e-12);
        EXPECT_NEAR(g.offset, g.depth * std::tan(g.refracted_zenith) + g.altitude * std::tan(g.zenith),
                    1e-9 * (g.altitude + g.depth));
    }
}

TEST(Geometry, RoundTripProperty) {
    for (double z = 0.0; z <= 70.0; z += 0.5) {
        const auto fwd = geometry_from_zenith(200e3, 10.0, z * deg);
        const auto inv = solve_transmit_zenith(200e3, 10.0, fwd.offset);
        EXPECT_NEAR(inv.zenith, z * deg, 1e-9) << z;
    }
}

TEST(Geometry, MonotoneInOffset) {
    double last = -1.0;
    for (double offset = 0.0; offset < 5e5; offset += 2.5e4) {
        const double z = solve_transmit_zenith(200e3, 10.0, offset).zenith;
        EXPECT_GT(z, last);
        last = z;
    }
}

TEST(Geometry, UnsolvableOffsetThrows) {
    EXPECT_THROW(solve_transmit_zenith(200e3, 10.0, 1e30), GeometryError);
}

TEST(Geometry, InvalidInputsAreConfigErrors) {
    EXPECT_THROW(solve_transmit_zenith(0.0, 10.0, 0.0), ConfigError);
    EXPECT_THROW(solve_transmit_zenith(200e3, -1.0, 0.0), ConfigError);
    EXPECT_THROW(solve_transmit_zenith(200e3, 10.0, 0.0, 1.2), ConfigError);
    EXPECT_THROW(geometry_from_zenith(200e3, 10.0, std::numbers::pi / 2), ConfigError);
}

TEST(Geometry, SlantPathLength) {
    EXPECT_DOUBLE_EQ(slant_path_length(geometry_from_zenith(200e3, 10.0, 0.0)), 200e3);
    EXPECT_NEAR(slant_path_length(geometry_from_zenith(200e3, 10.0, 60.0 * deg)), 400e3, 1e-6);
    EXPECT_NEAR(slant_path_length(geometry_from_zenith(200e3, 10.0, 30.0 * deg)), 230940.10767585030, 1e-6);
}

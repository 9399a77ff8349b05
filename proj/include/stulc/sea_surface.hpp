#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stulc/error.hpp"
#include "stulc/numerics/rng.hpp"

namespace stulc::interface {

inline constexpr double gravity = 9.81;

/// Pierson-Moskowitz omnidirectional wavenumber spectrum,
/// S(k) = a / (2 k^3) exp(-b g^2 / (k^2 U^4)), a = 8.1e-3, b = 0.74.
inline double pierson_moskowitz(double kappa, double wind_speed) {
    if (kappa <= 0.0 || wind_speed <= 0.0) {
        return 0.0;
    }
    constexpr double a = 8.1e-3;
    constexpr double b = 0.74;
    const double u2 = wind_speed * wind_speed;
    return a / (2.0 * kappa * kappa * kappa) * std::exp(-b * gravity * gravity / (kappa * kappa * u2 * u2));
}

/// Directional spectrum S(k)/k * cos^2(theta - theta_w) / pi, normalized so its
/// integral over the wavenumber plane equals the elevation variance.
inline double directional_spectrum(double kx, double ky, double wind_speed, double wind_direction) {
    const double kappa = std::hypot(kx, ky);
    if (kappa == 0.0) {
        return 0.0;
    }
    const double c = std::cos(std::atan2(ky, kx) - wind_direction);
    return pierson_moskowitz(kappa, wind_speed) / kappa * c * c / std::numbers::pi;
}

/// Significant wave height of the Pierson-Moskowitz spectrum, 4 sqrt(a U^4 / (4 b g^2)).
inline double pierson_moskowitz_hs(double wind_speed) {
    return 4.0 * std::sqrt(8.1e-3 / (4.0 * 0.74)) * wind_speed * wind_speed / gravity;
}

/// Periodic elevation field over [-Lx/2, Lx/2) x [-Ly/2, Ly/2); elevation[ix * My + iy].
struct SeaSurfaceField {
    double lx = 0.0;
    double ly = 0.0;
    int mx = 0;
    int my = 0;
    double dx = 0.0;
    double dy = 0.0;
    std::vector<double> elevation;
    std::uint64_t seed = 0;

    static SeaSurfaceField flat(double lx, double ly, int mx, int my) {
        SeaSurfaceField f;
        f.lx = lx;
        f.ly = ly;
        f.mx = mx;
        f.my = my;
        f.dx = lx / mx;
        f.dy = ly / my;
        f.elevation.assign(static_cast<std::size_t>(mx) * my, 0.0);
        return f;
    }

    double at(int ix, int iy) const { return elevation[static_cast<std::size_t>(ix) * my + iy]; }

    bool contains(double x, double y) const {
        return x >= -0.5 * lx && x <= 0.5 * lx && y >= -0.5 * ly && y <= 0.5 * ly;
    }

    /// Bilinear elevation at (x, y); empty outside the synthesized patch.
    std::optional<double> height(double x, double y) const {
        if (!contains(x, y)) {
            return std::nullopt;
        }
        const double gx = (x + 0.5 * lx) / dx;
        const double gy = (y + 0.5 * ly) / dy;
        const int ix = std::min(static_cast<int>(gx), mx - 1);
        const int iy = std::min(static_cast<int>(gy), my - 1);
        const double fx = gx - ix;
        const double fy = gy - iy;
        // The synthesized field is periodic, so the far edge wraps to index 0.
        const int jx = (ix + 1) % mx;
        const int jy = (iy + 1) % my;
        return (1.0 - fx) * ((1.0 - fy) * at(ix, iy) + fy * at(ix, jy)) +
               fx * ((1.0 - fy) * at(jx, iy) + fy * at(jx, jy));
    }

    double variance() const {
        double mean = 0.0;
        for (double v : elevation) {
            mean += v;
        }
        mean /= static_cast<double>(elevation.size());
        double var = 0.0;
        for (double v : elevation) {
            var += (v - mean) * (v - mean);
        }
        return var / static_cast<double>(elevation.size());
    }

    /// Flat binary export: a text header line, then mx*my little-endian doubles.
    void write_binary(std::ostream& os) const {
        os << "stulc-sea-surface mx=" << mx << " my=" << my << " dx=" << dx << " dy=" << dy << " seed=" << seed
           << "\n";
        os.write(reinterpret_cast<const char*>(elevation.data()),
                 static_cast<std::streamsize>(elevation.size() * sizeof(double)));
    }
};

namespace detail {

struct FftwDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

} // namespace detail

/// Linear-filter synthesis: complex white noise shaped by sqrt(S dk_x dk_y)
/// on the discrete wavenumbers k = 2 pi m / L, then one inverse real FFT.
/// spectrum(kx, ky) returns the two-sided directional spectrum.
template <class Spectrum>
SeaSurfaceField synthesize_sea_surface(Spectrum&& spectrum, double lx, double ly, int mx, int my,
                                       numerics::RngStream& rng) {
    require(mx >= 2 && my >= 2 && mx % 2 == 0 && my % 2 == 0, "sea surface: sample counts must be even and >= 2");
    require(lx > 0.0 && ly > 0.0, "sea surface: patch lengths must be > 0");
    auto field = SeaSurfaceField::flat(lx, ly, mx, my);
    field.seed = rng.seed();
    const int mh = my / 2 + 1;
    const std::size_t n_complex = static_cast<std::size_t>(mx) * mh;
    std::unique_ptr<fftw_complex, detail::FftwFree> spec(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_complex)));
    std::unique_ptr<double, detail::FftwFree> out(
        static_cast<double*>(fftw_malloc(sizeof(double) * static_cast<std::size_t>(mx) * my)));
    if (!spec || !out) {
        throw NumericError("sea surface: FFTW allocation failed");
    }
    std::unique_ptr<fftw_plan_s, detail::FftwDeleter> plan(
        fftw_plan_dft_c2r_2d(mx, my, spec.get(), out.get(), FFTW_ESTIMATE));

    const double dkx = 2.0 * std::numbers::pi / lx;
    const double dky = 2.0 * std::numbers::pi / ly;
    const auto signed_index = [](int i, int n) { return i <= n / 2 ? i : i - n; };
    std::vector<std::complex<double>> coeff(n_complex);
    for (int ix = 0; ix < mx; ++ix) {
        for (int iy = 0; iy < mh; ++iy) {
            const double kx = dkx * signed_index(ix, mx);
            const double ky = dky * iy;
            const double amp = std::sqrt(std::max(0.0, spectrum(kx, ky)) * dkx * dky);
            const double re = rng.normal();
            const double im = rng.normal();
            coeff[static_cast<std::size_t>(ix) * mh + iy] = amp * std::complex<double>(re, im) / std::numbers::sqrt2;
        }
    }
    // Columns ky = 0 and ky = Nyquist hold both +kx and -kx: make them Hermitian.
    for (int iy : {0, my / 2}) {
        for (int ix = 0; ix < mx; ++ix) {
            const int jx = (mx - ix) % mx;
            auto& a = coeff[static_cast<std::size_t>(ix) * mh + iy];
            if (jx == ix) {
                a = {a.real() * std::numbers::sqrt2, 0.0};
            } else if (ix < jx) {
                coeff[static_cast<std::size_t>(jx) * mh + iy] = std::conj(a);
            }
        }
    }
    coeff[0] = 0.0;
    for (std::size_t i = 0; i < n_complex; ++i) {
        spec.get()[i][0] = coeff[i].real();
        spec.get()[i][1] = coeff[i].imag();
    }
    fftw_execute(plan.get());
    std::copy(out.get(), out.get() + field.elevation.size(), field.elevation.begin());
    return field;
}

/// Pierson-Moskowitz sea with cos^2 spreading about wind_direction.
inline SeaSurfaceField synthesize_sea_surface(double wind_speed, double lx, double ly, int mx, int my,
                                              numerics::RngStream& rng, double wind_direction = 0.0) {
    return synthesize_sea_surface(
        [&](double kx, double ky) { return directional_spectrum(kx, ky, wind_speed, wind_direction); }, lx, ly, mx,
        my, rng);
}

} // namespace stulc::interface

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "stulc/atmosphere.hpp"
#include "stulc/channel.hpp"
#include "stulc/interface.hpp"
#include "stulc/metrics.hpp"
#include "stulc/numerics/quadrature.hpp"
#include "stulc/scenario.hpp"
#include "stulc/sea_surface.hpp"
#include "stulc/underwater.hpp"

namespace stulc {

/// All per-scenario precomputation: geometry, mean spot and its grid, the
/// fading sampler, the sea surface, the theta_0 table and the underwater
/// Rytov table. Built once, then shared by every photon batch.
class Channel {
public:
    explicit Channel(const Scenario& s) : scenario_(s) {
        s.validate();
        geom_ = s.geometry();
        beam_ = s.beam();
        const auto profile = s.profile();
        const double k = beam_.wavenumber();
        spot_radius_ = atmosphere::long_term_spot_radius(beam_, geom_, profile);
        const int m = s.grid_m > 0 ? s.grid_m
                                   : std::max(1, static_cast<int>(std::lround(2.0 * spot_radius_ / s.grid_cell_m)));
        mean_grid_ = atmosphere::mean_irradiance_grid(beam_, spot_radius_, m);

        const atmosphere::FadingCorrelation correlation(geom_, profile, k);
        atmospheric_rytov_ = s.atm_fading ? correlation.rytov() : 0.0;
        if (atmospheric_rytov_ > 0.0) {
            const auto cov = atmosphere::fading_covariance(mean_grid_, correlation);
            fading_ = std::make_unique<atmosphere::FadingSampler>(
                cov, std::vector<double>(mean_grid_.cells(), correlation.log_variance()));
        }

        if (s.surface_flat) {
            surface_ = interface::SeaSurfaceField::flat(s.surface_length_m, s.surface_length_m, s.surface_samples,
                                                        s.surface_samples);
        } else {
            numerics::RngStream rng(s.seed, numerics::streams::sea_surface);
            surface_ = interface::synthesize_sea_surface(s.surface_wind_ms, s.surface_length_m, s.surface_length_m,
                                                         s.surface_samples, s.surface_samples, rng,
                                                         s.surface_wind_direction_deg * Scenario::deg);
        }
        cox_ = s.slope_variance > 0.0 ? interface::CoxMunkParams::with_sigma_sq(s.slope_variance)
                                      : interface::CoxMunkParams::from_wind(s.surface_wind_ms);
        theta0_ = std::make_shared<interface::Theta0Pdf>(geom_.zenith, cox_.sigma_sq, geom_.index_ratio);
        rytov_ = std::make_shared<underwater::RytovTable>(s.ocean(), k);
    }

    Channel(const Channel&) = delete;
    Channel& operator=(const Channel&) = delete;

    const Scenario& scenario() const { return scenario_; }
    const LinkGeometry& geometry() const { return geom_; }
    double spot_radius() const { return spot_radius_; }
    double atmospheric_rytov() const { return atmospheric_rytov_; }
    const atmosphere::IrradianceGrid& mean_grid() const { return mean_grid_; }
    const interface::SeaSurfaceField& surface() const { return surface_; }
    const interface::Theta0Pdf& theta0() const { return *theta0_; }
    const atmosphere::FadingSampler* fading() const { return fading_.get(); }

    underwater::TransportModel model() const {
        underwater::TransportModel m;
        m.optics = scenario_.optics();
        m.scatter_orders = scenario_.scatter_orders;
        m.atmospheric_rytov = atmospheric_rytov_;
        m.rytov = rytov_;
        m.theta0 = theta0_;
        m.calm_direction = interface::incident_direction(geom_.refracted_zenith);
        m.surface = &surface_;
        m.depth = geom_.depth;
        // photons carry the power inside the truncated grid, not the Gaussian tail
        m.power_scale = mean_grid_.total_power() * beam_.atmospheric_transmittance;
        return m;
    }

    underwater::SimulationOutput run(const std::vector<underwater::Receiver>& receivers, int threads,
                                     bool traces = false) const {
        const underwater::EmissionSampler emitter(mean_grid_, geom_, surface_, cox_);
        underwater::SimulationOptions opt;
        opt.seed = scenario_.seed;
        opt.photons = scenario_.photons;
        opt.threads = threads;
        opt.traces = traces;
        auto out = underwater::simulate(emitter, fading_.get(), model(), receivers, opt);
        for (auto& r : out.results) {
            r.scenario_id = scenario_.hash();
        }
        return out;
    }

private:
    Scenario scenario_;
    LinkGeometry geom_;
    atmosphere::BeamParams beam_;
    double spot_radius_ = 0.0;
    double atmospheric_rytov_ = 0.0;
    atmosphere::IrradianceGrid mean_grid_;
    std::unique_ptr<atmosphere::FadingSampler> fading_;
    interface::SeaSurfaceField surface_;
    interface::CoxMunkParams cox_;
    std::shared_ptr<interface::Theta0Pdf> theta0_;
    std::shared_ptr<underwater::RytovTable> rytov_;
};

struct PowerMap {
    int lattice = 0;
    double half_width = 0.0;
    std::vector<double> coords;  // receiver x (= y) positions
    std::vector<double> power;   // [row(y) * lattice + col(x)]
    std::vector<double> std_error;
    std::vector<double> sigma_tur_sq;
    underwater::ChannelResult center;
    long long discarded = 0;
    double spot_radius = 0.0;
    double atmospheric_rytov = 0.0;
    std::vector<underwater::TraceRecord> traces;

    double at(int row, int col) const { return power[static_cast<std::size_t>(row) * lattice + col]; }
};

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1);
    }
    return v;
}

inline std::vector<double> logspace(double lo, double hi, int n) {
    auto v = linspace(std::log(lo), std::log(hi), n);
    for (auto& x : v) {
        x = std::exp(x);
    }
    if (n > 1) {
        v.front() = lo;
        v.back() = hi;
    }
    return v;
}

/// Received power over a lattice of receiver positions at depth D. All
/// receivers score the same photon paths.
inline PowerMap run_power_map(const Scenario& s, int threads = 1, bool traces = false) {
    const Channel channel(s);
    PowerMap map;
    map.lattice = s.map_lattice;
    map.spot_radius = channel.spot_radius();
    map.atmospheric_rytov = channel.atmospheric_rytov();
    map.half_width = s.map_half_width_m > 0.0 ? s.map_half_width_m
                                              : channel.spot_radius() / std::cos(channel.geometry().zenith);
    map.coords = s.map_lattice == 1 ? std::vector<double>{0.0} : linspace(-map.half_width, map.half_width, s.map_lattice);
    std::vector<underwater::Receiver> receivers;
    const auto base = s.receiver();
    int center_index = 0;
    for (int row = 0; row < map.lattice; ++row) {
        for (int col = 0; col < map.lattice; ++col) {
            auto r = base;
            r.position = {map.coords[static_cast<std::size_t>(col)], map.coords[static_cast<std::size_t>(row)], 0.0};
            if (row == map.lattice / 2 && col == map.lattice / 2) {
                center_index = static_cast<int>(receivers.size());
            }
            receivers.push_back(r);
        }
    }
    auto out = channel.run(receivers, threads, traces);
    for (const auto& r : out.results) {
        map.power.push_back(r.total_power);
        map.std_error.push_back(r.standard_error);
        map.sigma_tur_sq.push_back(r.sigma_tur_sq);
    }
    map.center = out.results[static_cast<std::size_t>(center_index)];
    map.discarded = out.discarded;
    map.traces = std::move(out.traces);
    return map;
}

/// Single receiver at the origin.
inline underwater::ChannelResult run_point(const Scenario& s, int threads = 1) {
    const Channel channel(s);
    return channel.run({s.receiver()}, threads).results.front();
}

struct SweepRow {
    double x = 0.0; // swept value (W, degrees, or gamma_th)
    double mean_power = 0.0;
    double sigma_tur_sq = 0.0;
    double standard_error = 0.0;
    double value = 0.0; // BER or outage probability
    double cross_check = 0.0;
    bool warning = false;
};

/// Mean BER versus transmit power (received power scales linearly with P_Tx,
/// so one transport run serves the whole sweep) or versus transmit zenith.
inline std::vector<SweepRow> run_ber_sweep(const Scenario& s, int threads = 1) {
    std::vector<SweepRow> rows;
    const auto noise = s.noise();
    const auto add_row = [&](double x, const underwater::ChannelResult& r, double scale) {
        SweepRow row;
        row.x = x;
        row.mean_power = r.total_power * scale;
        row.sigma_tur_sq = r.sigma_tur_sq;
        row.standard_error = r.standard_error * scale;
        const auto ber = metrics::mean_ber({row.mean_power, row.sigma_tur_sq}, noise);
        row.value = ber.value;
        row.cross_check = ber.cross_check;
        row.warning = ber.disagreement;
        rows.push_back(row);
    };
    if (s.sweep_variable == "power") {
        const auto base = run_point(s, threads);
        for (double p : linspace(s.sweep_power_min_w, s.sweep_power_max_w, s.sweep_points)) {
            add_row(p, base, p / s.power_w);
        }
    } else {
        for (double a : linspace(s.sweep_angle_min_deg, s.sweep_angle_max_deg, s.sweep_points)) {
            Scenario t = s;
            t.zenith_deg = a;
            add_row(a, run_point(t, threads), 1.0);
        }
    }
    return rows;
}

/// Outage probability over log-spaced SNR thresholds.
inline std::vector<SweepRow> run_outage_sweep(const Scenario& s, int threads = 1) {
    const auto r = run_point(s, threads);
    const auto noise = s.noise();
    std::vector<SweepRow> rows;
    for (double g : logspace(s.outage_gamma_min, s.outage_gamma_max, s.outage_points)) {
        SweepRow row;
        row.x = g;
        row.mean_power = r.total_power;
        row.sigma_tur_sq = r.sigma_tur_sq;
        row.standard_error = r.standard_error;
        row.value = metrics::outage_probability({r.total_power, r.sigma_tur_sq}, noise, g);
        row.cross_check = row.value;
        rows.push_back(row);
    }
    return rows;
}

struct InterfaceCase {
    double zenith_deg = 0.0;
    double wind_ms = 0.0;
    double sigma_sq = 0.0;
    double l1 = 0.0;
    double l1_full_azimuth = 0.0; // informational: uniform facet azimuth
    double normalization_residual = 0.0;
    double retained_mass = 0.0;
    double max_branch_gap = 0.0;
    double support_max = 0.0;
    double support_upper = 0.0;
    double mass_below_1mrad = 0.0;
    long long beyond_support = 0;
    long long rejected = 0;
    bool pass = false;
};

struct InterfaceReport {
    std::vector<InterfaceCase> cases;
    bool pass = true;
};

/// Relative density jump at each interior term join.
inline double theta0_branch_gap(const interface::Theta0Pdf& pdf) {
    double worst = 0.0;
    for (double b : pdf.branch_points()) {
        if (b <= 1e-6 || b >= pdf.support_upper() - 1e-6) {
            continue;
        }
        const double lo = pdf.density(b - 1e-7);
        const double hi = pdf.density(b + 1e-7);
        const double scale = std::max(lo, hi);
        if (scale > 0.0) {
            worst = std::max(worst, std::abs(lo - hi) / scale);
        }
    }
    return worst;
}

inline double theta0_normalization(const interface::Theta0Pdf& pdf) {
    return numerics::adaptive_integrate_detailed([&](double t) { return pdf.density(t); },
                                                 pdf.quadrature_breakpoints(), {1e-10, 20000, 1e-14})
        .value;
}

/// Closed-form theta_0 density against brute-force facet refraction over
/// zeta in {0, 15, 30, 45} deg and v in {3, 6, 12} m/s (or the forced slope
/// variance when surface.slope_variance is set).
inline InterfaceReport validate_interface(const Scenario& s) {
    InterfaceReport report;
    std::vector<std::pair<double, double>> slopes; // (wind, sigma_sq)
    if (s.slope_variance > 0.0) {
        slopes.emplace_back(s.surface_wind_ms, s.slope_variance);
    } else {
        for (double v : {3.0, 6.0, 12.0}) {
            slopes.emplace_back(v, interface::CoxMunkParams::from_wind(v).sigma_sq);
        }
    }
    std::uint64_t stream = numerics::streams::validation;
    for (double zdeg : {0.0, 15.0, 30.0, 45.0}) {
        for (const auto& [wind, sigma_sq] : slopes) {
            InterfaceCase c;
            c.zenith_deg = zdeg;
            c.wind_ms = wind;
            c.sigma_sq = sigma_sq;
            const interface::Theta0Pdf pdf(zdeg * Scenario::deg, sigma_sq, s.index_ratio);
            c.support_max = pdf.support_max();
            c.support_upper = pdf.support_upper();
            c.retained_mass = pdf.retained_mass();
            c.normalization_residual = std::abs(theta0_normalization(pdf) - 1.0);
            c.max_branch_gap = theta0_branch_gap(pdf);
            c.mass_below_1mrad = pdf.cdf(1e-3);
            numerics::RngStream plane(s.seed, stream++);
            const auto h = interface::brute_force_theta0(pdf, s.validation_samples, 100, true, plane);
            c.l1 = interface::theta0_l1_distance(pdf, h);
            c.beyond_support = h.beyond_support;
            c.rejected = h.rejected;
            numerics::RngStream full(s.seed, stream++);
            const auto h3 = interface::brute_force_theta0(pdf, s.validation_samples, 100, false, full);
            c.l1_full_azimuth = interface::theta0_l1_distance(pdf, h3);
            c.pass = c.l1 < 0.05 && c.normalization_residual < 1e-3 && c.max_branch_gap < 0.1;
            report.pass = report.pass && c.pass;
            report.cases.push_back(c);
        }
    }
    return report;
}

} // namespace stulc

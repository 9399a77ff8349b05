#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "stulc/atmosphere.hpp"
#include "stulc/error.hpp"
#include "stulc/geometry.hpp"
#include "stulc/interface.hpp"
#include "stulc/numerics/rng.hpp"
#include "stulc/sea_surface.hpp"
#include "stulc/underwater.hpp"
#include "stulc/vec3.hpp"

namespace stulc::underwater {

/// Draws photon launch states from the mean irradiance grid: cell by inverse
/// CDF (column-major flattening), uniform jitter inside the cell, stretch by
/// sec(zeta) onto the sea surface, Cox-Munk facet refraction.
class EmissionSampler {
public:
    static constexpr int max_facet_draws = 64;

    EmissionSampler(const atmosphere::IrradianceGrid& mean_grid, const LinkGeometry& geom,
                    const interface::SeaSurfaceField& surface, interface::CoxMunkParams cox)
        : grid_(&mean_grid), geom_(geom), surface_(&surface), cox_(cox) {
        const int m = grid_->m;
        cdf_.resize(grid_->cells());
        double acc = 0.0;
        for (int col = 0; col < m; ++col) {
            for (int row = 0; row < m; ++row) {
                acc += grid_->at(row, col);
                cdf_[static_cast<std::size_t>(col) * m + row] = acc;
            }
        }
        if (!(acc > 0.0)) {
            throw NumericError("emission: mean irradiance grid carries no power");
        }
        for (auto& c : cdf_) {
            c /= acc;
        }
        incident_ = interface::incident_direction(geom.zenith);
    }

    /// One photon, or nothing when it lands outside the synthesized surface
    /// or no transmitting facet turns up. fading holds xi_f per cell
    /// (row-major); empty means xi_f = 1.
    std::optional<Photon> emit(numerics::RngStream& rng, const std::vector<double>& fading) const {
        const auto& g = *grid_;
        const int m = g.m;
        const double u = rng.uniform();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        const auto k = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                                                        static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
        const int row = static_cast<int>(k % static_cast<std::size_t>(m));
        const int col = static_cast<int>(k / static_cast<std::size_t>(m));
        const double xr = g.center_x(col) + (rng.uniform() - 0.5) * g.cell_size;
        const double yr = g.center_y(row) + (rng.uniform() - 0.5) * g.cell_size;

        Photon p;
        p.weight = fading.empty() ? 1.0 : interpolate(fading, xr, yr);
        const double xs = xr;
        const double ys = yr / std::cos(geom_.zenith);
        const auto h = surface_->height(xs, ys);
        if (!h) {
            return std::nullopt;
        }
        p.position = {xs, ys + geom_.depth * std::tan(geom_.refracted_zenith), *h + geom_.depth};
        for (int attempt = 0; attempt < max_facet_draws; ++attempt) {
            const Vec3 normal = interface::facet_normal(cox_, rng);
            if (-dot(normal, incident_) > 0.0) {
                const auto ev = interface::refract(incident_, normal, geom_.index_ratio);
                p.direction = ev.refracted_dir;
                p.transmittance = ev.transmittance;
                return p;
            }
        }
        return std::nullopt;
    }

    /// Bilinear interpolation of a per-cell field between cell centres.
    double interpolate(const std::vector<double>& field, double x, double y) const {
        const auto& g = *grid_;
        const int m = g.m;
        const double gx = std::clamp((x + g.half_width) / g.cell_size - 0.5, 0.0, static_cast<double>(m - 1));
        const double gy = std::clamp((y + g.half_width) / g.cell_size - 0.5, 0.0, static_cast<double>(m - 1));
        const int c0 = std::min(static_cast<int>(gx), std::max(0, m - 2));
        const int r0 = std::min(static_cast<int>(gy), std::max(0, m - 2));
        const int c1 = std::min(c0 + 1, m - 1);
        const int r1 = std::min(r0 + 1, m - 1);
        const double fx = gx - c0;
        const double fy = gy - r0;
        const auto v = [&](int r, int c) { return field[static_cast<std::size_t>(r) * m + c]; };
        return (1.0 - fy) * ((1.0 - fx) * v(r0, c0) + fx * v(r0, c1)) + fy * ((1.0 - fx) * v(r1, c0) + fx * v(r1, c1));
    }

private:
    const atmosphere::IrradianceGrid* grid_;
    LinkGeometry geom_;
    const interface::SeaSurfaceField* surface_;
    interface::CoxMunkParams cox_;
    std::vector<double> cdf_;
    Vec3 incident_;
};

struct EmissionBatch {
    std::vector<Photon> photons;
    long long discarded = 0;
};

/// Emits count photons, photon i from stream photon_base + i. Weights are
/// the fluctuating-to-mean irradiance ratio with xi_t divided out.
inline EmissionBatch emit_photons(const atmosphere::IrradianceGrid& mean_grid,
                                  const atmosphere::IrradianceGrid& fluct_grid, const LinkGeometry& geom,
                                  const interface::SeaSurfaceField& surface, interface::CoxMunkParams cox,
                                  long long count, std::uint64_t seed) {
    require(count >= 1, "emit_photons: photon count must be >= 1");
    if (fluct_grid.cells() != mean_grid.cells()) {
        throw DomainError("emit_photons: grids differ in shape");
    }
    std::vector<double> weights(mean_grid.cells(), 1.0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (mean_grid.values[i] > 0.0) {
            weights[i] = fluct_grid.values[i] / (mean_grid.values[i] * fluct_grid.transmittance);
        }
    }
    EmissionSampler sampler(mean_grid, geom, surface, cox);
    EmissionBatch batch;
    batch.photons.reserve(static_cast<std::size_t>(count));
    for (long long i = 0; i < count; ++i) {
        numerics::RngStream rng(seed, numerics::streams::photon_base + static_cast<std::uint64_t>(i));
        if (auto p = sampler.emit(rng, weights)) {
            batch.photons.push_back(std::move(*p));
        } else {
            ++batch.discarded;
        }
    }
    return batch;
}

/// Everything the per-photon transport needs besides the photon itself.
struct TransportModel {
    WaterOptics optics;
    int scatter_orders = 4;
    double atmospheric_rytov = 0.0; // leg i = -1
    std::shared_ptr<const RytovTable> rytov;
    std::shared_ptr<const interface::Theta0Pdf> theta0;
    Vec3 calm_direction{0.0, 0.0, -1.0}; // T'
    const interface::SeaSurfaceField* surface = nullptr;
    double depth = 10.0;
    double power_scale = 1.0; // P_Tx * xi_t
    double weight_floor = 1e-12;

    double surface_z(double x, double y) const {
        if (surface) {
            if (auto h = surface->height(x, y)) {
                return depth + *h;
            }
        }
        return depth;
    }
    double leg_rytov(double d) const { return rytov ? (*rytov)(d) : 0.0; }
};

struct TraceRecord {
    long long photon = 0;
    int order = 0;
    Vec3 position;
    double weight = 0.0;
    double detection = 0.0;
};

/// Per-receiver, per-order running sums.
struct Tally {
    int receivers = 0;
    int orders = 0;
    std::vector<double> power;   // sum of p Tr P
    std::vector<double> scint;   // sum of (prod M2 - 1) over FOV-counted photons
    std::vector<long long> counted;

    Tally(int n_receivers, int n_orders)
        : receivers(n_receivers), orders(n_orders),
          power(static_cast<std::size_t>(n_receivers) * n_orders, 0.0),
          scint(power.size(), 0.0), counted(power.size(), 0) {}

    std::size_t index(int r, int n) const { return static_cast<std::size_t>(r) * orders + n; }

    void add(const Tally& o) {
        for (std::size_t i = 0; i < power.size(); ++i) {
            power[i] += o.power[i];
            scint[i] += o.scint[i];
            counted[i] += o.counted[i];
        }
    }
};

/// Follows one photon through N_s scattering orders and scores it at every
/// receiver.
inline void trace_photon(Photon photon, const TransportModel& model, numerics::RngStream& rng,
                         const std::vector<Receiver>& receivers, const std::vector<Vec3>& axes,
                         const std::vector<double>& cos_fov, Tally& tally,
                         std::vector<TraceRecord>* traces = nullptr, long long photon_index = 0) {
    const WaterOptics& op = model.optics;
    const double ke = op.k_e();
    const double base = photon.weight * photon.transmittance;
    const double m2_atm = scintillation_moment(model.atmospheric_rytov);

    // Zero order: direct path from the surface entry point.
    for (std::size_t r = 0; r < receivers.size(); ++r) {
        const auto geo = detection_geometry(photon.position, receivers[r], axes[r], cos_fov[r]);
        if (!geo.in_fov) {
            continue;
        }
        const double theta = angle_between(model.calm_direction, geo.to_receiver);
        const double density = model.theta0 ? model.theta0->tabulated_density(theta) : 0.0;
        const double pd = zero_order_detection(geo.distance, geo.cos_phi, theta, density, receivers[r], ke);
        const auto i = tally.index(static_cast<int>(r), 0);
        tally.power[i] += base * pd;
        tally.scint[i] += m2_atm * scintillation_moment(model.leg_rytov(geo.distance)) - 1.0;
        ++tally.counted[i];
        if (traces && r == 0) {
            traces->push_back({photon_index, 0, photon.position, photon.weight, pd});
        }
    }

    double prefix_m2 = m2_atm; // product over the legs already travelled
    for (int n = 1; n <= model.scatter_orders; ++n) {
        const double step = sample_step(ke, rng);
        const Vec3 next = photon.position + step * photon.direction;
        if (next.z > model.surface_z(next.x, next.y)) {
            break;
        }
        photon.position = next;
        photon.leg_lengths.push_back(step);
        photon.scatter_order = n;
        prefix_m2 *= scintillation_moment(model.leg_rytov(step));
        const double order_factor = std::pow(op.albedo(), n);
        if (base * order_factor < model.weight_floor) {
            break;
        }
        for (std::size_t r = 0; r < receivers.size(); ++r) {
            const auto geo = detection_geometry(photon.position, receivers[r], axes[r], cos_fov[r]);
            if (!geo.in_fov) {
                continue;
            }
            double pd = 0.0;
            if (geo.cos_phi > 0.0) {
                const double cos_theta = dot(photon.direction, geo.to_receiver);
                pd = order_factor * std::exp(-ke * geo.distance) * geo.cos_phi *
                     std::min(1.0, hg_phase(op.g, cos_theta) * receivers[r].solid_angle(geo.distance));
            }
            const auto i = tally.index(static_cast<int>(r), n);
            tally.power[i] += base * pd;
            tally.scint[i] += prefix_m2 * scintillation_moment(model.leg_rytov(geo.distance)) - 1.0;
            ++tally.counted[i];
            if (traces && r == 0) {
                traces->push_back({photon_index, n, photon.position, photon.weight, pd});
            }
        }
        const double theta = sample_hg_angle(op.g, rng);
        const double phi = 2.0 * std::numbers::pi * rng.uniform();
        photon.direction = rotate_direction(photon.direction, theta, phi);
    }
}

/// Folds raw tallies into a ChannelResult for receiver r.
inline ChannelResult finalize(const Tally& total, const std::vector<Tally>& blocks,
                              const std::vector<long long>& block_sizes, int r, long long photons,
                              double power_scale) {
    ChannelResult res;
    res.photon_count = photons;
    const int orders = total.orders;
    res.per_order_power.resize(static_cast<std::size_t>(orders));
    res.per_order_scintillation.resize(static_cast<std::size_t>(orders));
    const double scale = power_scale / static_cast<double>(photons);
    for (int n = 0; n < orders; ++n) {
        const auto i = total.index(r, n);
        res.per_order_power[static_cast<std::size_t>(n)] = scale * total.power[i];
        res.per_order_scintillation[static_cast<std::size_t>(n)] =
            total.counted[i] > 0 ? total.scint[i] / static_cast<double>(total.counted[i]) : 0.0;
        res.total_power += res.per_order_power[static_cast<std::size_t>(n)];
    }
    if (res.total_power > 0.0) {
        for (int n = 0; n < orders; ++n) {
            const double share = res.per_order_power[static_cast<std::size_t>(n)] / res.total_power;
            res.sigma_tur_sq += share * share * res.per_order_scintillation[static_cast<std::size_t>(n)];
        }
    }
    // Batch-means standard error across photon blocks.
    if (blocks.size() >= 2) {
        double grand = 0.0;
        for (int n = 0; n < orders; ++n) {
            grand += total.power[total.index(r, n)];
        }
        double ss = 0.0;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            double s = 0.0;
            for (int n = 0; n < orders; ++n) {
                s += blocks[b].power[blocks[b].index(r, n)];
            }
            const double expected = grand * static_cast<double>(block_sizes[b]) / static_cast<double>(photons);
            ss += (s - expected) * (s - expected);
        }
        const auto nb = static_cast<double>(blocks.size());
        res.standard_error = scale * std::sqrt(ss * nb / (nb - 1.0));
    }
    return res;
}

/// Transport of an explicit photon list to a single receiver. Photon i draws
/// its path from stream transport_base + i (emission used photon_base + i).
inline ChannelResult transport(const std::vector<Photon>& photons, const Receiver& receiver,
                               const TransportModel& model, std::uint64_t seed, long long emitted = 0) {
    if (photons.empty()) {
        throw NumericError("transport: every photon was discarded before transport");
    }
    const std::vector<Receiver> rx{receiver};
    const std::vector<Vec3> axes{receiver.fov_axis()};
    const std::vector<double> cos_fov{std::cos(receiver.fov_half_angle)};
    constexpr long long block = 256;
    std::vector<Tally> blocks;
    std::vector<long long> sizes;
    Tally total(1, model.scatter_orders + 1);
    for (std::size_t start = 0; start < photons.size(); start += block) {
        Tally t(1, model.scatter_orders + 1);
        const std::size_t end = std::min(photons.size(), start + static_cast<std::size_t>(block));
        for (std::size_t i = start; i < end; ++i) {
            numerics::RngStream rng(seed, numerics::streams::transport_base + i);
            trace_photon(photons[i], model, rng, rx, axes, cos_fov, t);
        }
        total.add(t);
        blocks.push_back(std::move(t));
        sizes.push_back(static_cast<long long>(end - start));
    }
    const long long count = std::max<long long>(emitted, static_cast<long long>(photons.size()));
    auto res = finalize(total, blocks, sizes, 0, count, model.power_scale);
    res.discarded_photons = count - static_cast<long long>(photons.size());
    res.seed = seed;
    return res;
}

struct SimulationOptions {
    std::uint64_t seed = 1;
    long long photons = 100000;
    int threads = 1;
    int block_size = 256;
    bool traces = false;
};

struct SimulationOutput {
    std::vector<ChannelResult> results; // one per receiver
    long long discarded = 0;
    std::vector<TraceRecord> traces;
};

/// Full semi-analytic Monte Carlo: photons are emitted and traced in fixed
/// blocks; each block redraws the atmospheric fading field from stream
/// fading_base + block. Blocks are reduced in index order, so the output does
/// not depend on the thread count.
inline SimulationOutput simulate(const EmissionSampler& emitter, const atmosphere::FadingSampler* fading,
                                 const TransportModel& model, const std::vector<Receiver>& receivers,
                                 const SimulationOptions& opt) {
    require(opt.photons >= 1, "simulate: photon count must be >= 1");
    require(opt.block_size >= 1, "simulate: block size must be >= 1");
    require(!receivers.empty(), "simulate: no receivers");
    std::vector<Vec3> axes;
    std::vector<double> cos_fov;
    for (const auto& r : receivers) {
        r.validate();
        axes.push_back(r.fov_axis());
        cos_fov.push_back(std::cos(r.fov_half_angle));
    }
    const int orders = model.scatter_orders + 1;
    const long long n_blocks = (opt.photons + opt.block_size - 1) / opt.block_size;
    std::vector<Tally> blocks(static_cast<std::size_t>(n_blocks), Tally(static_cast<int>(receivers.size()), orders));
    std::vector<long long> sizes(static_cast<std::size_t>(n_blocks), 0);
    std::vector<long long> discarded(static_cast<std::size_t>(n_blocks), 0);
    std::vector<std::vector<TraceRecord>> traces(opt.traces ? static_cast<std::size_t>(n_blocks) : 0);

    auto run_block = [&](long long b) {
        std::vector<double> xi;
        if (fading) {
            numerics::RngStream frng(opt.seed, numerics::streams::fading_base + static_cast<std::uint64_t>(b));
            xi = fading->draw(frng).xi;
        }
        const long long start = b * opt.block_size;
        const long long end = std::min(opt.photons, start + opt.block_size);
        sizes[static_cast<std::size_t>(b)] = end - start;
        auto& tally = blocks[static_cast<std::size_t>(b)];
        auto* trace = opt.traces ? &traces[static_cast<std::size_t>(b)] : nullptr;
        for (long long i = start; i < end; ++i) {
            numerics::RngStream rng(opt.seed, numerics::streams::photon_base + static_cast<std::uint64_t>(i));
            auto p = emitter.emit(rng, xi);
            if (!p) {
                ++discarded[static_cast<std::size_t>(b)];
                continue;
            }
            trace_photon(std::move(*p), model, rng, receivers, axes, cos_fov, tally, trace, i);
        }
    };

    const int workers = std::max(1, std::min<int>(opt.threads, static_cast<int>(n_blocks)));
    if (workers == 1) {
        for (long long b = 0; b < n_blocks; ++b) {
            run_block(b);
        }
    } else {
        std::atomic<long long> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (long long b = next++; b < n_blocks; b = next++) {
                    try {
                        run_block(b);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) {
                            failure = std::current_exception();
                        }
                    }
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    SimulationOutput out;
    Tally total(static_cast<int>(receivers.size()), orders);
    for (long long b = 0; b < n_blocks; ++b) {
        total.add(blocks[static_cast<std::size_t>(b)]);
        out.discarded += discarded[static_cast<std::size_t>(b)];
        if (opt.traces) {
            auto& t = traces[static_cast<std::size_t>(b)];
            out.traces.insert(out.traces.end(), t.begin(), t.end());
        }
    }
    if (out.discarded == opt.photons) {
        throw NumericError("simulate: all photons were discarded (beam footprint outside the sea-surface patch?)");
    }
    for (std::size_t r = 0; r < receivers.size(); ++r) {
        auto res = finalize(total, blocks, sizes, static_cast<int>(r), opt.photons, model.power_scale);
        res.discarded_photons = out.discarded;
        res.seed = opt.seed;
        out.results.push_back(std::move(res));
    }
    return out;
}

} // namespace stulc::underwater

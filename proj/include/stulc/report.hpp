#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stulc/error.hpp"
#include "stulc/pipeline.hpp"
#include "stulc/scenario.hpp"

namespace stulc::report {

using nlohmann::ordered_json;

inline std::string num(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Run metadata; repeated as leading CSV columns and as a JSON "run" block.
struct RunInfo {
    std::string scenario_hash;
    std::uint64_t seed = 0;
    long long photons = 0;
    std::string version = stulc::version;

    static RunInfo of(const Scenario& s) { return {s.hash(), s.seed, s.photons, stulc::version}; }

    std::string csv_header() const { return "scenario_hash,seed,photons,version"; }
    std::string csv_prefix() const {
        return scenario_hash + "," + std::to_string(seed) + "," + std::to_string(photons) + "," + version;
    }
    ordered_json json() const {
        return {{"scenario_hash", scenario_hash}, {"seed", seed}, {"photons", photons}, {"version", version}};
    }
};

inline ordered_json result_json(const underwater::ChannelResult& r) {
    return {{"total_power_w", r.total_power},
            {"per_order_power_w", r.per_order_power},
            {"per_order_scintillation", r.per_order_scintillation},
            {"sigma_tur_sq", r.sigma_tur_sq},
            {"standard_error_w", r.standard_error},
            {"discarded_photons", r.discarded_photons}};
}

inline std::string power_map_csv(const PowerMap& map, const RunInfo& run) {
    std::ostringstream os;
    os << run.csv_header() << ",x_m,y_m,power_w,standard_error_w,sigma_tur_sq\r\n";
    for (int row = 0; row < map.lattice; ++row) {
        for (int col = 0; col < map.lattice; ++col) {
            const auto k = static_cast<std::size_t>(row) * map.lattice + col;
            os << run.csv_prefix() << ',' << num(map.coords[static_cast<std::size_t>(col)]) << ','
               << num(map.coords[static_cast<std::size_t>(row)]) << ',' << num(map.power[k]) << ','
               << num(map.std_error[k]) << ',' << num(map.sigma_tur_sq[k]) << "\r\n";
        }
    }
    return os.str();
}

inline ordered_json power_map_json(const PowerMap& map, const RunInfo& run) {
    double peak = 0.0;
    double total = 0.0;
    for (double p : map.power) {
        peak = std::max(peak, p);
        total += p;
    }
    return {{"run", run.json()},
            {"lattice", map.lattice},
            {"half_width_m", map.half_width},
            {"long_term_spot_radius_m", map.spot_radius},
            {"atmospheric_rytov_variance", map.atmospheric_rytov},
            {"surface_spectrum", "pierson-moskowitz, cos^2 spreading"},
            {"peak_power_w", peak},
            {"lattice_power_sum_w", total},
            {"discarded_photons", map.discarded},
            {"center", result_json(map.center)}};
}

inline std::string traces_csv(const std::vector<underwater::TraceRecord>& traces, const RunInfo& run) {
    std::ostringstream os;
    os << run.csv_header() << ",photon,order,x_m,y_m,z_m,weight,detection\r\n";
    for (const auto& t : traces) {
        os << run.csv_prefix() << ',' << t.photon << ',' << t.order << ',' << num(t.position.x) << ','
           << num(t.position.y) << ',' << num(t.position.z) << ',' << num(t.weight) << ',' << num(t.detection)
           << "\r\n";
    }
    return os.str();
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows, const RunInfo& run, const std::string& x_name,
                             const std::string& value_name) {
    std::ostringstream os;
    os << run.csv_header() << ',' << x_name << ",mean_power_w,sigma_tur_sq,standard_error_w," << value_name
       << ",cross_check,warning\r\n";
    for (const auto& r : rows) {
        os << run.csv_prefix() << ',' << num(r.x) << ',' << num(r.mean_power) << ',' << num(r.sigma_tur_sq) << ','
           << num(r.standard_error) << ',' << num(r.value) << ',' << num(r.cross_check) << ','
           << (r.warning ? 1 : 0) << "\r\n";
    }
    return os.str();
}

inline ordered_json sweep_json(const std::vector<SweepRow>& rows, const RunInfo& run, const std::string& x_name,
                               const std::string& value_name) {
    ordered_json table = ordered_json::array();
    bool warning = false;
    for (const auto& r : rows) {
        table.push_back({{x_name, r.x},
                         {"mean_power_w", r.mean_power},
                         {"sigma_tur_sq", r.sigma_tur_sq},
                         {value_name, r.value}});
        warning = warning || r.warning;
    }
    return {{"run", run.json()}, {"quadrature_disagreement", warning}, {"rows", table}};
}

inline std::string interface_csv(const InterfaceReport& rep, const RunInfo& run) {
    std::ostringstream os;
    os << run.csv_header()
       << ",zenith_deg,wind_ms,sigma_sq,l1,normalization_residual,max_branch_gap,retained_mass,"
          "beyond_support,l1_full_azimuth,mass_below_1mrad,pass\r\n";
    for (const auto& c : rep.cases) {
        os << run.csv_prefix() << ',' << num(c.zenith_deg) << ',' << num(c.wind_ms) << ',' << num(c.sigma_sq) << ','
           << num(c.l1) << ',' << num(c.normalization_residual) << ',' << num(c.max_branch_gap) << ','
           << num(c.retained_mass) << ',' << c.beyond_support << ',' << num(c.l1_full_azimuth) << ','
           << num(c.mass_below_1mrad) << ',' << (c.pass ? 1 : 0) << "\r\n";
    }
    return os.str();
}

inline ordered_json interface_json(const InterfaceReport& rep, const RunInfo& run) {
    ordered_json cases = ordered_json::array();
    for (const auto& c : rep.cases) {
        cases.push_back({{"zenith_deg", c.zenith_deg},
                         {"wind_ms", c.wind_ms},
                         {"sigma_sq", c.sigma_sq},
                         {"l1", c.l1},
                         {"normalization_residual", c.normalization_residual},
                         {"max_branch_gap", c.max_branch_gap},
                         {"retained_mass", c.retained_mass},
                         {"support_max_rad", c.support_max},
                         {"support_upper_rad", c.support_upper},
                         {"beyond_support", c.beyond_support},
                         {"rejected", c.rejected},
                         {"l1_full_azimuth", c.l1_full_azimuth},
                         {"mass_below_1mrad", c.mass_below_1mrad},
                         {"pass", c.pass}});
    }
    return {{"run", run.json()},
            {"thresholds", {{"l1", 0.05}, {"normalization", 1e-3}, {"branch_gap", 0.1}}},
            {"pass", rep.pass},
            {"cases", cases}};
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw ConfigError("cannot open output file " + path.string());
    }
    os << text;
    if (!os) {
        throw ConfigError("failed writing " + path.string());
    }
}

inline void write_json(const std::filesystem::path& path, const ordered_json& j) { write_file(path, j.dump(2) + "\n"); }

} // namespace stulc::report

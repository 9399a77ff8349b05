#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stulc/atmosphere.hpp"
#include "stulc/error.hpp"
#include "stulc/metrics.hpp"
#include "stulc/underwater.hpp"

namespace stulc {

inline constexpr const char* version = "0.1.0";

/// Every tunable of one simulation run. Angles are kept in degrees here and
/// converted when the pipeline is built.
struct Scenario {
    // link
    double altitude_m = 200e3;
    double depth_m = 10.0;
    double zenith_deg = 0.0;
    double index_ratio = 0.75;
    // beam
    double wavelength_m = 532e-9;
    double divergence_rad = 22e-6;
    double power_w = 5.0;
    double transmittance = 0.7;
    double phase_front_radius_m = std::numeric_limits<double>::infinity();
    // atmosphere
    double cn2_ground = 1.7e-17;
    double atm_wind_ms = 21.0;
    double outer_scale_m = 10.0;
    bool atm_fading = true; // false: mean spot only, no scintillation
    // receiving-plane grid
    int grid_m = 0; // 0: round(2 W_Lt / cell_size)
    double grid_cell_m = 0.1;
    // sea surface
    double surface_wind_ms = 6.0;
    double surface_wind_direction_deg = 0.0;
    double surface_length_m = 20.0;
    int surface_samples = 1000;
    bool surface_flat = false;
    double slope_variance = 0.0; // 0: Cox-Munk relation from the wind speed
    // water
    double k_a = 0.069;
    double k_s = 0.080;
    double hg_g = 0.8708;
    // ocean turbulence
    double ocean_epsilon = 1e-2;
    double ocean_chi_t = 1e-5;
    double ocean_omega = -3.0;
    double ocean_kolmogorov_m = 1e-3;
    // receiver
    double aperture_m2 = 1.77e-4;
    double rx_zenith_deg = 90.0;
    double rx_azimuth_deg = 90.0;
    double rx_fov_deg = 90.0;
    // noise
    double noise_temperature_k = 300.0;
    double noise_bandwidth_hz = 1e9;
    double noise_resistance_ohm = 1e6;
    double responsivity = 0.7;
    // simulation
    long long photons = 100000;
    std::uint64_t seed = 1;
    int scatter_orders = 4;
    // power map
    int map_lattice = 21;
    double map_half_width_m = 0.0; // 0: W_Lt sec(zeta)
    // sweeps
    std::string sweep_variable = "power";
    double sweep_power_min_w = 1e-3; // the default link saturates BER near 0 at watts
    double sweep_power_max_w = 2e-2;
    double sweep_angle_min_deg = 0.0;
    double sweep_angle_max_deg = 45.0;
    int sweep_points = 10;
    double outage_gamma_min = 1e4;
    double outage_gamma_max = 1e9;
    int outage_points = 13;
    // validate-interface
    long long validation_samples = 1000000;

    static constexpr double deg = 3.14159265358979323846 / 180.0;

    LinkGeometry geometry() const {
        return geometry_from_zenith(altitude_m, depth_m, zenith_deg * deg, index_ratio);
    }
    atmosphere::BeamParams beam() const {
        return {wavelength_m, divergence_rad, power_w, phase_front_radius_m, transmittance};
    }
    atmosphere::TurbulenceProfile profile() const { return {cn2_ground, atm_wind_ms, outer_scale_m}; }
    underwater::WaterOptics optics() const { return {k_a, k_s, hg_g}; }
    underwater::OceanTurbulence ocean() const {
        return {ocean_epsilon, ocean_chi_t, ocean_omega, ocean_kolmogorov_m};
    }
    underwater::Receiver receiver() const {
        underwater::Receiver r;
        r.aperture_area = aperture_m2;
        r.zenith = rx_zenith_deg * deg;
        r.azimuth = rx_azimuth_deg * deg;
        r.fov_half_angle = rx_fov_deg * deg;
        return r;
    }
    metrics::NoiseModel noise() const {
        return {noise_temperature_k, noise_bandwidth_hz, noise_resistance_ohm, responsivity};
    }
    double cox_munk_sigma_sq() const {
        return slope_variance > 0.0 ? slope_variance : std::sqrt(0.003 + 0.00512 * surface_wind_ms);
    }

    void validate() const;
    std::string canonical() const;
    std::string hash() const;
};

namespace scenario_detail {

struct Field {
    std::string key;
    std::function<std::string(const Scenario&)> get;
    std::function<void(Scenario&, const std::string&)> set;
};

inline std::string format_double(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& key, const std::string& text) {
    if (text == "inf" || text == "infinity") {
        return std::numeric_limits<double>::infinity();
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError("config: " + key + " expects a number, got '" + text + "'");
    }
    if (used != text.size()) {
        throw ConfigError("config: " + key + " expects a number, got '" + text + "'");
    }
    return v;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError("config: " + key + " expects an integer, got '" + text + "'");
    }
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1") {
        return true;
    }
    if (text == "false" || text == "0") {
        return false;
    }
    throw ConfigError("config: " + key + " expects true or false, got '" + text + "'");
}

#define STULC_REAL(name, member)                                                                            \
    Field {                                                                                                 \
        name, [](const Scenario& s) { return format_double(s.member); },                                   \
            [](Scenario& s, const std::string& v) { s.member = parse_double(name, v); }                    \
    }
#define STULC_INT(name, member)                                                                             \
    Field {                                                                                                 \
        name, [](const Scenario& s) { return std::to_string(s.member); },                                  \
            [](Scenario& s, const std::string& v) { s.member = parse_int<decltype(s.member)>(name, v); }   \
    }

inline const std::vector<Field>& fields() {
    static const std::vector<Field> table{
        STULC_REAL("link.altitude_m", altitude_m),
        STULC_REAL("link.depth_m", depth_m),
        STULC_REAL("link.zenith_deg", zenith_deg),
        STULC_REAL("link.index_ratio", index_ratio),
        STULC_REAL("beam.wavelength_m", wavelength_m),
        STULC_REAL("beam.divergence_rad", divergence_rad),
        STULC_REAL("beam.power_w", power_w),
        STULC_REAL("beam.transmittance", transmittance),
        STULC_REAL("beam.phase_front_radius_m", phase_front_radius_m),
        STULC_REAL("atmosphere.cn2_ground", cn2_ground),
        STULC_REAL("atmosphere.wind_ms", atm_wind_ms),
        STULC_REAL("atmosphere.outer_scale_m", outer_scale_m),
        Field{"atmosphere.fading", [](const Scenario& s) { return std::string(s.atm_fading ? "true" : "false"); },
              [](Scenario& s, const std::string& v) { s.atm_fading = parse_bool("atmosphere.fading", v); }},
        STULC_INT("grid.m", grid_m),
        STULC_REAL("grid.cell_size_m", grid_cell_m),
        STULC_REAL("surface.wind_ms", surface_wind_ms),
        STULC_REAL("surface.wind_direction_deg", surface_wind_direction_deg),
        STULC_REAL("surface.length_m", surface_length_m),
        STULC_INT("surface.samples", surface_samples),
        Field{"surface.flat", [](const Scenario& s) { return std::string(s.surface_flat ? "true" : "false"); },
              [](Scenario& s, const std::string& v) { s.surface_flat = parse_bool("surface.flat", v); }},
        STULC_REAL("surface.slope_variance", slope_variance),
        STULC_REAL("water.k_a", k_a),
        STULC_REAL("water.k_s", k_s),
        STULC_REAL("water.g", hg_g),
        STULC_REAL("ocean.epsilon", ocean_epsilon),
        STULC_REAL("ocean.chi_t", ocean_chi_t),
        STULC_REAL("ocean.omega", ocean_omega),
        STULC_REAL("ocean.kolmogorov_m", ocean_kolmogorov_m),
        STULC_REAL("receiver.aperture_m2", aperture_m2),
        STULC_REAL("receiver.zenith_deg", rx_zenith_deg),
        STULC_REAL("receiver.azimuth_deg", rx_azimuth_deg),
        STULC_REAL("receiver.fov_deg", rx_fov_deg),
        STULC_REAL("noise.temperature_k", noise_temperature_k),
        STULC_REAL("noise.bandwidth_hz", noise_bandwidth_hz),
        STULC_REAL("noise.resistance_ohm", noise_resistance_ohm),
        STULC_REAL("noise.responsivity", responsivity),
        STULC_INT("sim.photons", photons),
        STULC_INT("sim.seed", seed),
        STULC_INT("sim.scatter_orders", scatter_orders),
        STULC_INT("map.lattice", map_lattice),
        STULC_REAL("map.half_width_m", map_half_width_m),
        Field{"sweep.variable", [](const Scenario& s) { return s.sweep_variable; },
              [](Scenario& s, const std::string& v) {
                  require(v == "power" || v == "angle", "config: sweep.variable must be power or angle");
                  s.sweep_variable = v;
              }},
        STULC_REAL("sweep.power_min_w", sweep_power_min_w),
        STULC_REAL("sweep.power_max_w", sweep_power_max_w),
        STULC_REAL("sweep.angle_min_deg", sweep_angle_min_deg),
        STULC_REAL("sweep.angle_max_deg", sweep_angle_max_deg),
        STULC_INT("sweep.points", sweep_points),
        STULC_REAL("outage.gamma_min", outage_gamma_min),
        STULC_REAL("outage.gamma_max", outage_gamma_max),
        STULC_INT("outage.points", outage_points),
        STULC_INT("validate.samples", validation_samples),
    };
    return table;
}

#undef STULC_REAL
#undef STULC_INT

// Presets expand into several numeric keys; they are applied before the
// explicit keys of the same file so an explicit value always wins.
inline void apply_preset(Scenario& s, const std::string& key, const std::string& value) {
    if (key == "atmosphere.preset") {
        if (value == "weak") {
            s.cn2_ground = atmosphere::TurbulenceProfile::weak().ground_cn2;
        } else if (value == "strong") {
            s.cn2_ground = atmosphere::TurbulenceProfile::strong().ground_cn2;
        } else {
            throw ConfigError("config: atmosphere.preset must be weak or strong");
        }
    } else if (key == "water.preset") {
        underwater::WaterOptics w;
        if (value == "clear") {
            w = underwater::WaterOptics::clear();
        } else if (value == "coastal") {
            w = underwater::WaterOptics::coastal();
        } else {
            throw ConfigError("config: water.preset must be clear or coastal");
        }
        s.k_a = w.k_a;
        s.k_s = w.k_s;
        s.hg_g = w.g;
    } else if (key == "ocean.preset") {
        underwater::OceanTurbulence t;
        if (value == "weak") {
            t = underwater::OceanTurbulence::weak();
        } else if (value == "strong") {
            t = underwater::OceanTurbulence::strong();
        } else if (value == "none") {
            t = underwater::OceanTurbulence::none();
        } else {
            throw ConfigError("config: ocean.preset must be weak, strong or none");
        }
        s.ocean_epsilon = t.epsilon;
        s.ocean_chi_t = t.chi_t;
        s.ocean_omega = t.omega;
        s.ocean_kolmogorov_m = t.kolmogorov_scale;
    }
}

inline bool is_preset(const std::string& key) {
    return key == "atmosphere.preset" || key == "water.preset" || key == "ocean.preset";
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace scenario_detail

/// Applies one key = value assignment (presets included).
inline void set_scenario_value(Scenario& s, const std::string& key, const std::string& value) {
    if (scenario_detail::is_preset(key)) {
        scenario_detail::apply_preset(s, key, value);
        return;
    }
    for (const auto& f : scenario_detail::fields()) {
        if (f.key == key) {
            f.set(s, value);
            return;
        }
    }
    throw ConfigError("config: unknown key '" + key + "'");
}

/// Parses flat "key = value" text; '#' starts a comment. Unknown keys, bad
/// values and duplicates are errors.
inline Scenario parse_scenario(const std::string& text, Scenario base = {}) {
    std::vector<std::pair<std::string, std::string>> presets;
    std::vector<std::pair<std::string, std::string>> values;
    std::map<std::string, int> seen;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        const std::string body = scenario_detail::trim(std::string_view(line).substr(0, hash));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: line " + std::to_string(number) + " is not 'key = value'");
        }
        const std::string key = scenario_detail::trim(std::string_view(body).substr(0, eq));
        const std::string value = scenario_detail::trim(std::string_view(body).substr(eq + 1));
        if (seen[key]++ > 0) {
            throw ConfigError("config: duplicate key '" + key + "'");
        }
        (scenario_detail::is_preset(key) ? presets : values).emplace_back(key, value);
    }
    for (const auto& [k, v] : presets) {
        set_scenario_value(base, k, v);
    }
    for (const auto& [k, v] : values) {
        set_scenario_value(base, k, v);
    }
    base.validate();
    return base;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

/// All fields in fixed order, full precision; presets appear resolved.
inline std::string Scenario::canonical() const {
    std::string out;
    for (const auto& f : scenario_detail::fields()) {
        out += f.key + " = " + f.get(*this) + "\n";
    }
    return out;
}

/// 64-bit FNV-1a digest of the canonical text, as 16 hex digits.
inline std::string Scenario::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline void Scenario::validate() const {
    require(altitude_m > 0.0, "scenario: link.altitude_m must be > 0");
    require(depth_m > 0.0, "scenario: link.depth_m must be > 0");
    require(zenith_deg >= 0.0 && zenith_deg < 90.0, "scenario: link.zenith_deg must lie in [0, 90)");
    require(index_ratio > 0.0 && index_ratio < 1.0, "scenario: link.index_ratio must lie in (0, 1)");
    beam().validate();
    profile().validate();
    require(grid_m >= 0, "scenario: grid.m must be >= 0");
    require(grid_cell_m > 0.0, "scenario: grid.cell_size_m must be > 0");
    require(surface_wind_ms >= 0.0, "scenario: surface.wind_ms must be >= 0");
    require(surface_length_m > 0.0, "scenario: surface.length_m must be > 0");
    require(surface_samples >= 2 && surface_samples % 2 == 0, "scenario: surface.samples must be even and >= 2");
    require(slope_variance >= 0.0, "scenario: surface.slope_variance must be >= 0");
    optics().validate();
    ocean().validate();
    receiver().validate();
    noise().validate();
    require(photons >= 1, "scenario: sim.photons must be >= 1");
    require(scatter_orders >= 0, "scenario: sim.scatter_orders must be >= 0");
    require(map_lattice >= 1, "scenario: map.lattice must be >= 1");
    require(map_half_width_m >= 0.0, "scenario: map.half_width_m must be >= 0");
    require(sweep_points >= 1 && outage_points >= 1, "scenario: sweep point counts must be >= 1");
    require(sweep_power_min_w > 0.0 && sweep_power_max_w >= sweep_power_min_w,
            "scenario: sweep power range must be positive and ordered");
    require(sweep_angle_min_deg >= 0.0 && sweep_angle_max_deg < 90.0 && sweep_angle_max_deg >= sweep_angle_min_deg,
            "scenario: sweep angle range must lie in [0, 90) and be ordered");
    require(outage_gamma_min > 0.0 && outage_gamma_max >= outage_gamma_min,
            "scenario: outage threshold range must be positive and ordered");
    require(validation_samples >= 1000, "scenario: validate.samples must be >= 1000");
}

} // namespace stulc

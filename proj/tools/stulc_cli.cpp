#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stulc/stulc.hpp"

namespace fs = std::filesystem;
using namespace stulc;

namespace {

struct Options {
    std::string config;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    long long photons = 0;
    int threads = 1;
    std::string out_dir = ".";
    bool debug_traces = false;
};

Scenario scenario_from(const Options& o, const CLI::App& app) {
    Scenario s = o.config.empty() ? Scenario{} : load_scenario(o.config);
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        }
        set_scenario_value(s, scenario_detail::trim(kv.substr(0, eq)), scenario_detail::trim(kv.substr(eq + 1)));
    }
    if (app.count("--seed") > 0) {
        s.seed = o.seed;
    }
    if (app.count("--photons") > 0) {
        s.photons = o.photons;
    }
    s.validate();
    return s;
}

fs::path out_path(const Options& o, const std::string& name) {
    std::error_code ec;
    fs::create_directories(o.out_dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory " + o.out_dir + ": " + ec.message());
    }
    return fs::path(o.out_dir) / name;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Satellite-to-underwater laser link channel simulator"};
    app.set_version_flag("--version", std::string(stulc::version));
    app.require_subcommand(1);

    Options o;
    app.add_option("--config", o.config, "Scenario file (dotted key = value)")->check(CLI::ExistingFile);
    app.add_option("--set", o.overrides, "Override one scenario key, e.g. --set water.preset=coastal");
    app.add_option("--seed", o.seed, "Run seed (overrides sim.seed)");
    app.add_option("--photons", o.photons, "Photon count (overrides sim.photons)")->check(CLI::PositiveNumber);
    app.add_option("--threads", o.threads, "Worker threads; affects wall time only")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", o.out_dir, "Output directory");
    app.add_flag("--debug-traces", o.debug_traces, "Also write per-scatter photon traces (power-map)");

    auto* power_map = app.add_subcommand("power-map", "Average received power over a lattice of receiver offsets");
    auto* ber = app.add_subcommand("ber-sweep", "Mean BER versus transmit power or transmit zenith");
    auto* outage = app.add_subcommand("outage-sweep", "Outage probability versus SNR threshold");
    auto* validate = app.add_subcommand("validate-interface", "theta_0 PDF against brute-force refraction");
    auto* defaults = app.add_subcommand("print-defaults", "Print the canonical scenario");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::config_error);
    }

    try {
        const Scenario s = scenario_from(o, app);
        const auto run = report::RunInfo::of(s);
        if (defaults->parsed()) {
            std::cout << s.canonical();
            return 0;
        }
        if (power_map->parsed()) {
            const auto map = run_power_map(s, o.threads, o.debug_traces);
            report::write_file(out_path(o, "power_map.csv"), report::power_map_csv(map, run));
            report::write_json(out_path(o, "power_map.json"), report::power_map_json(map, run));
            if (o.debug_traces) {
                report::write_file(out_path(o, "traces.csv"), report::traces_csv(map.traces, run));
            }
            std::cout << "center power " << report::num(map.center.total_power) << " W, sigma_tur^2 "
                      << report::num(map.center.sigma_tur_sq) << "\n";
        } else if (ber->parsed()) {
            const auto rows = run_ber_sweep(s, o.threads);
            const std::string x = s.sweep_variable == "power" ? "transmit_power_w" : "zenith_deg";
            report::write_file(out_path(o, "ber_sweep.csv"), report::sweep_csv(rows, run, x, "ber"));
            report::write_json(out_path(o, "ber_sweep.json"), report::sweep_json(rows, run, x, "ber"));
        } else if (outage->parsed()) {
            const auto rows = run_outage_sweep(s, o.threads);
            report::write_file(out_path(o, "outage_sweep.csv"), report::sweep_csv(rows, run, "gamma_th", "outage"));
            report::write_json(out_path(o, "outage_sweep.json"), report::sweep_json(rows, run, "gamma_th", "outage"));
        } else if (validate->parsed()) {
            const auto rep = validate_interface(s);
            report::write_file(out_path(o, "interface_report.csv"), report::interface_csv(rep, run));
            report::write_json(out_path(o, "interface_report.json"), report::interface_json(rep, run));
            for (const auto& c : rep.cases) {
                std::cout << "zeta " << c.zenith_deg << " deg, v " << c.wind_ms << " m/s: L1 " << report::num(c.l1)
                          << (c.pass ? "  ok" : "  FAIL") << "\n";
            }
            if (!rep.pass) {
                return static_cast<int>(ExitCode::validation_failure);
            }
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::numeric_failure);
    }
}

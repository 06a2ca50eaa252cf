// heomstark command-line driver
//
//   heomstark <simulate|map|converge|sweep|bath-check> [--config FILE] [--preset NAME]
//             [--out DIR] [--threads N] [--print-config]
//
// Settings are layered: built-in defaults, preset, config file, HEOMSTARK_*
// environment variables, then command-line flags.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "heomstark/commands.hpp"

namespace hs = heomstark;

int main(int argc, char** argv) {
    CLI::App app{"Driven two-level system in a structured bath: HEOM propagation and dynamical-map analysis"};
    app.require_subcommand(1);

    std::string config_path;
    std::string preset;
    std::optional<std::string> out_dir;
    std::optional<int> threads;
    bool print_config = false;
    app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--preset", preset, "built-in preset")->check(CLI::IsMember({"fig2", "fig4", "fig7", "smoke"}));
    app.add_option("--out", out_dir, "output directory (overrides outputs.directory)");
    app.add_option("--threads", threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    app.add_flag("--print-config", print_config, "print the effective configuration and exit");

    auto* simulate = app.add_subcommand("simulate", "single propagation from initial_state");
    auto* map = app.add_subcommand("map", "dynamical-map tomography, volume, rate and bumps");
    auto* converge = app.add_subcommand("converge", "volume convergence over converge.l_values");
    auto* sweep = app.add_subcommand("sweep", "maps over sweep.intensities_w_cm2 x sweep.signs");
    auto* bath_check = app.add_subcommand("bath-check", "spectral density and correlation-function check");
    for (auto* sub : {simulate, map, converge, sweep, bath_check}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : hs::cli::kValidationError;
    }

    hs::config::RunConfig cfg;
    try {
        cfg = hs::config::resolve({preset, config_path, environ, out_dir, threads});
    } catch (const hs::config::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hs::cli::kValidationError;
    }

    if (print_config) {
        std::cout << hs::config::print(cfg) << "\n";
        return 0;
    }

    const std::filesystem::path dir = cfg.outputs.directory;
    try {
        hs::cli::Outcome out;
        if (*simulate) out = hs::cli::cmd_simulate(cfg, dir);
        else if (*map) out = hs::cli::cmd_map(cfg, dir);
        else if (*converge) out = hs::cli::cmd_converge(cfg, dir);
        else if (*sweep) out = hs::cli::cmd_sweep(cfg, dir);
        else out = hs::cli::cmd_bath_check(cfg, dir);

        if (out.report.contains("flags")) std::cerr << "flags: " << out.report["flags"].dump() << "\n";
        if (out.report.contains("error")) std::cerr << "error: " << out.report["error"].dump() << "\n";
        std::cerr << "report: " << (dir / "report.json").string() << " (exit " << out.exit_code << ")\n";
        return out.exit_code;
    } catch (const hs::config::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hs::cli::kValidationError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hs::cli::kValidationError;
    } catch (const std::length_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hs::cli::kValidationError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hs::cli::kNumericalAbort;
    }
}

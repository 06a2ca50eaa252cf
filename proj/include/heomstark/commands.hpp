// The heomstark subcommands. Each writes its tables plus report.json into the
// output directory and returns the process exit status.

#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "heomstark/analysis.hpp"
#include "heomstark/bath.hpp"
#include "heomstark/config.hpp"
#include "heomstark/fields.hpp"
#include "heomstark/heom.hpp"
#include "heomstark/hierarchy.hpp"
#include "heomstark/io.hpp"
#include "heomstark/model.hpp"
#include "heomstark/parallel.hpp"
#include "heomstark/units.hpp"

namespace heomstark::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using config::RunConfig;

inline constexpr int kReportSchemaVersion = 1;

enum ExitStatus : int { kSuccess = 0, kValidationError = 1, kCompletedWithFlags = 2, kNumericalAbort = 3 };

struct Outcome {
    int exit_code{kSuccess};
    json report;
};

inline int resolve_threads(const RunConfig& c) { return c.threads > 0 ? c.threads : default_thread_count(); }

// Everything derived from the config that the engine needs.
struct Physics {
    SystemParams params;
    config::ResolvedBath bath;
    heom::Hierarchy hierarchy;
};

inline Physics resolve_physics(const RunConfig& c, int l_max) {
    auto bath = config::resolve_bath(c);
    auto h = heom::build_hierarchy(static_cast<int>(bath.expansion.size()), l_max);
    return {config::system_params(c), std::move(bath), std::move(h)};
}

namespace detail {

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

inline json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json report_head(const std::string& command, const RunConfig& c) {
    json r;
    r["schema_version"] = kReportSchemaVersion;
    r["command"] = command;
    r["config"] = config::to_json(c);
    return r;
}

inline json hierarchy_json(const Physics& p) {
    json b = {{"n_matsubara", p.bath.spec.n_matsubara}, {"exponential_terms", p.bath.expansion.size()}};
    if (p.bath.auto_error) b["auto_max_rel_error"] = *p.bath.auto_error;
    return {{"k_modes", p.hierarchy.k_modes()},
            {"l_max", p.hierarchy.l_max()},
            {"ados", p.hierarchy.size()},
            {"bath", b}};
}

inline json dressed_gap_json(const SystemParams& params, const std::vector<double>& field) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double e : field) {
        const double g = dressed_gap(params, e);
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    return {{"field_free_au", dressed_gap(params, 0.0)}, {"min_au", lo}, {"max_au", hi}};
}

inline json trajectory_stats(const heom::Trajectory& t) {
    json j = {{"max_trace_deviation", t.max_trace_dev},
              {"max_hermiticity_deviation", t.max_herm_dev},
              {"min_eigenvalue", t.min_eigenvalue},
              {"steps", t.steps},
              {"rejected_steps", t.rejected}};
    if (t.max_consistency_residual > 0) j["max_first_moment_residual"] = t.max_consistency_residual;
    return j;
}

inline json bumps_json(const std::vector<analysis::Bump>& bumps) {
    json arr = json::array();
    for (const auto& b : bumps) arr.push_back({{"t_fs", b.t_fs}, {"V", b.value}, {"prominence", b.prominence}});
    return arr;
}

inline void finish(Outcome& out, const fs::path& dir, const io::Manifest& manifest,
                   std::chrono::steady_clock::time_point start) {
    out.report["exit_status"] = out.exit_code;
    out.report["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.report["files"] = manifest.to_json();
    io::write_text(dir / "report.json", out.report.dump(2) + "\n");
}

inline std::optional<std::size_t> probe_index(config::InitialKind k) {
    switch (k) {
        case config::InitialKind::diabatic_1: return 0;
        case config::InitialKind::diabatic_2: return 1;
        case config::InitialKind::plus: return 2;
        case config::InitialKind::plus_i: return 3;
        case config::InitialKind::custom: return std::nullopt;
    }
    return std::nullopt;
}

inline std::vector<double> single_state_row(double t_fs, const Mat2& rho, const SystemParams& params) {
    const auto b = analysis::bloch_coords(rho);
    const Mat2 ad = analysis::adiabatic_density(rho, params);
    double s = nan();
    try {
        s = analysis::entropy(rho);
    } catch (const analysis::EntropyError&) {
    }
    return {t_fs, s, b.x, b.y, b.z, ad(0, 0).real(), ad(0, 1).real(), ad(0, 1).imag()};
}

inline const std::vector<std::string> kStateColumns{"S_bits", "x", "y", "z", "ad_pop_ground", "re_rho12_ad",
                                                    "im_rho12_ad"};

}  // namespace detail

// ---------------------------------------------------------------------------
// simulate

inline void write_trajectory_csv(const fs::path& path, const heom::Trajectory& t, const SystemParams& params) {
    io::CsvWriter w(path, {"t_fs", "e_field_au", "rho11", "rho22", "re_rho12", "im_rho12", "re_x1_11", "im_x1_11",
                           "re_x1_22", "im_x1_22", "re_x1_12", "im_x1_12", "ad_rho11", "ad_rho22", "re_rho12_ad",
                           "im_rho12_ad"});
    for (std::size_t i = 0; i < t.t_fs.size(); ++i) {
        const Mat2& r = t.rho[i];
        const Mat2& x = t.x1[i];
        const Mat2 ad = analysis::adiabatic_density(r, params);
        w.row({t.t_fs[i], t.field[i], r(0, 0).real(), r(1, 1).real(), r(0, 1).real(), r(0, 1).imag(),
               x(0, 0).real(), x(0, 0).imag(), x(1, 1).real(), x(1, 1).imag(), x(0, 1).real(), x(0, 1).imag(),
               ad(0, 0).real(), ad(1, 1).real(), ad(0, 1).real(), ad(0, 1).imag()});
    }
    w.close();
}

inline Outcome cmd_simulate(const RunConfig& c, const fs::path& dir) {
    const auto start = std::chrono::steady_clock::now();
    config::validate(c);
    fs::create_directories(dir);
    io::Manifest manifest(dir);
    Outcome out{kSuccess, detail::report_head("simulate", c)};

    const auto phys = resolve_physics(c, c.propagation.l_max);
    out.report["hierarchy"] = detail::hierarchy_json(phys);
    const auto pulse = config::pulse_spec(c);
    auto pcfg = c.propagation;
    pcfg.threads = resolve_threads(c);
    heom::HeomGenerator gen(phys.hierarchy, phys.bath.expansion, phys.params, pcfg.rescaling);

    heom::Trajectory traj;
    try {
        traj = heom::propagate(config::initial_density(c.initial_state), pcfg, gen, pulse);
    } catch (const heom::NumericalAbort& e) {
        out.exit_code = kNumericalAbort;
        out.report["error"] = {{"message", e.what()}, {"time_fs", units::au_to_fs(e.time_au)}};
        detail::finish(out, dir, manifest, start);
        return out;
    }

    if (c.outputs.trajectory_csv) {
        write_trajectory_csv(dir / "trajectory.csv", traj, phys.params);
        manifest.add(dir / "trajectory.csv");
    }
    if (c.outputs.analysis_csv) {
        std::vector<std::string> header{"t_fs"};
        header.insert(header.end(), detail::kStateColumns.begin(), detail::kStateColumns.end());
        io::CsvWriter w(dir / "analysis.csv", header);
        for (std::size_t i = 0; i < traj.t_fs.size(); ++i) w.row(detail::single_state_row(traj.t_fs[i], traj.rho[i], phys.params));
        w.close();
        manifest.add(dir / "analysis.csv");
    }
    if (c.outputs.checkpoint) {
        heom::save_checkpoint((dir / "final_state.ckpt").string(), traj.final_state, phys.hierarchy);
        manifest.add(dir / "final_state.ckpt");
    }

    out.report["trajectory"] = detail::trajectory_stats(traj);
    out.report["dressed_gap"] = detail::dressed_gap_json(phys.params, traj.field);
    out.report["flags"] = {{"positivity_warning", traj.positivity_warning()}};
    detail::finish(out, dir, manifest, start);
    return out;
}

// ---------------------------------------------------------------------------
// map

struct MapRun {
    analysis::MapSeries maps;
    analysis::VolumeSeries volume;
};

inline MapRun run_map(const RunConfig& c, const Physics& phys, const fields::PulseSpec& pulse, int threads) {
    heom::HeomGenerator gen(phys.hierarchy, phys.bath.expansion, phys.params, c.propagation.rescaling);
    MapRun r;
    r.maps = analysis::reconstruct_map(c.propagation, gen, pulse, threads);
    r.volume = analysis::volume_series(r.maps, c.analysis.bump_prominence);
    r.volume.nm = analysis::detect_nonmarkovianity(r.volume.times_fs, r.volume.volume, c.analysis.bump_prominence,
                                                   c.analysis.increase_tolerance);
    return r;
}

inline json map_summary(const MapRun& r) {
    double min_eig = 1.0, trace = 0.0, herm = 0.0;
    for (const auto& t : r.maps.trajectories) {
        min_eig = std::min(min_eig, t.min_eigenvalue);
        trace = std::max(trace, t.max_trace_dev);
        herm = std::max(herm, t.max_herm_dev);
    }
    const auto& v = r.volume.volume;
    return {{"linearity_error", r.maps.linearity_error},
            {"reliable", r.maps.reliable},
            {"non_markovian", r.volume.nm.non_markovian},
            {"max_volume_increase", r.volume.nm.max_increase},
            {"bumps", detail::bumps_json(r.volume.nm.bumps)},
            {"final_volume", v.empty() ? json(nullptr) : json(v.back())},
            {"max_trace_deviation", trace},
            {"max_hermiticity_deviation", herm},
            {"min_eigenvalue", min_eig}};
}

inline void write_map_outputs(const fs::path& dir, const RunConfig& c, const Physics& phys, const MapRun& r,
                              io::Manifest& manifest) {
    const auto& vs = r.volume;
    if (c.outputs.analysis_csv) {
        std::vector<std::string> header{"t_fs", "V", "Gamma_au"};
        header.insert(header.end(), detail::kStateColumns.begin(), detail::kStateColumns.end());
        io::CsvWriter w(dir / "analysis.csv", header);
        const auto probe = detail::probe_index(c.initial_state.kind);
        const analysis::Vec3 r0 = analysis::bloch_coords(config::initial_density(c.initial_state)).vec();
        for (std::size_t i = 0; i < vs.times_fs.size(); ++i) {
            const Mat2 rho = probe ? r.maps.trajectories[*probe].rho[i]
                                   : analysis::density_from_bloch(r.maps.maps[i].apply(r0));
            auto row = detail::single_state_row(vs.times_fs[i], rho, phys.params);
            row.insert(row.begin() + 1, {vs.volume[i], vs.rate[i]});
            w.row(row);
        }
        w.close();
        manifest.add(dir / "analysis.csv");
    }
    if (c.outputs.ellipsoid_frames) {
        io::CsvWriter w(dir / "ellipsoids.csv", {"t_fs", "cx", "cy", "cz", "a1", "a2", "a3", "d11", "d12", "d13",
                                                 "d21", "d22", "d23", "d31", "d32", "d33"});
        for (const auto& m : r.maps.maps) {
            const auto e = analysis::ellipsoid(m);
            // row j of the direction block is the unit vector of semi-axis a_j
            w.row({m.time_fs, e.center(0), e.center(1), e.center(2), e.semi_axes(0), e.semi_axes(1),
                   e.semi_axes(2), e.axes(0, 0), e.axes(1, 0), e.axes(2, 0), e.axes(0, 1), e.axes(1, 1),
                   e.axes(2, 1), e.axes(0, 2), e.axes(1, 2), e.axes(2, 2)});
        }
        w.close();
        manifest.add(dir / "ellipsoids.csv");
    }
    if (c.outputs.trajectory_csv) {
        write_trajectory_csv(dir / "trajectory.csv", r.maps.trajectories[detail::probe_index(c.initial_state.kind).value_or(0)],
                             phys.params);
        manifest.add(dir / "trajectory.csv");
    }
}

inline Outcome cmd_map(const RunConfig& c, const fs::path& dir) {
    const auto start = std::chrono::steady_clock::now();
    config::validate(c);
    fs::create_directories(dir);
    io::Manifest manifest(dir);
    Outcome out{kSuccess, detail::report_head("map", c)};

    const auto phys = resolve_physics(c, c.propagation.l_max);
    out.report["hierarchy"] = detail::hierarchy_json(phys);
    const auto pulse = config::pulse_spec(c);
    MapRun r;
    try {
        r = run_map(c, phys, pulse, resolve_threads(c));
    } catch (const heom::NumericalAbort& e) {
        out.exit_code = kNumericalAbort;
        out.report["error"] = {{"message", e.what()}, {"time_fs", units::au_to_fs(e.time_au)}};
        detail::finish(out, dir, manifest, start);
        return out;
    }
    write_map_outputs(dir, c, phys, r, manifest);

    out.report["map"] = map_summary(r);
    out.report["dressed_gap"] = detail::dressed_gap_json(phys.params, r.maps.trajectories[0].field);
    out.report["flags"] = {{"linearity_failed", !r.maps.reliable},
                           {"positivity_warning", out.report["map"]["min_eigenvalue"].get<double>() < -1e-6}};
    if (!r.maps.reliable) out.exit_code = kCompletedWithFlags;
    detail::finish(out, dir, manifest, start);
    return out;
}

// ---------------------------------------------------------------------------
// converge

// (V_hi - V_lo) / V_lo per sample; NaN where |V_lo| is below the volume floor.
inline std::vector<double> relative_volume_difference(const std::vector<double>& lo, const std::vector<double>& hi) {
    std::vector<double> d(lo.size(), detail::nan());
    for (std::size_t i = 0; i < lo.size() && i < hi.size(); ++i) {
        if (std::abs(lo[i]) > analysis::kVolumeFloor) d[i] = (hi[i] - lo[i]) / lo[i];
    }
    return d;
}

inline double max_abs_finite(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) {
        if (std::isfinite(x)) m = std::max(m, std::abs(x));
    }
    return m;
}

inline Outcome cmd_converge(const RunConfig& c, const fs::path& dir) {
    const auto start = std::chrono::steady_clock::now();
    config::validate(c);
    fs::create_directories(dir);
    io::Manifest manifest(dir);
    Outcome out{kSuccess, detail::report_head("converge", c)};

    const auto pulse = config::pulse_spec(c);
    const auto& ls = c.converge.l_values;
    std::vector<std::vector<double>> volumes;
    std::vector<double> times;
    json levels = json::array();
    for (int l : ls) {
        RunConfig cl = c;
        cl.propagation.l_max = l;
        const auto phys = resolve_physics(cl, l);
        try {
            const auto r = run_map(cl, phys, pulse, resolve_threads(c));
            if (!r.maps.reliable) out.exit_code = kCompletedWithFlags;
            times = r.volume.times_fs;
            volumes.push_back(r.volume.volume);
            auto s = map_summary(r);
            s["l_max"] = l;
            s["ados"] = phys.hierarchy.size();
            levels.push_back(s);
        } catch (const heom::NumericalAbort& e) {
            out.exit_code = kNumericalAbort;
            out.report["error"] = {{"message", e.what()}, {"l_max", l}, {"time_fs", units::au_to_fs(e.time_au)}};
            out.report["levels"] = levels;
            detail::finish(out, dir, manifest, start);
            return out;
        }
    }

    std::vector<std::string> header{"t_fs"};
    for (int l : ls) header.push_back("V_L" + std::to_string(l));
    std::vector<std::vector<double>> rel;
    json pairs = json::array();
    for (std::size_t i = 0; i + 1 < ls.size(); ++i) {
        header.push_back("rel_L" + std::to_string(ls[i]) + "_L" + std::to_string(ls[i + 1]));
        rel.push_back(relative_volume_difference(volumes[i], volumes[i + 1]));
        double max_abs = 0.0;
        for (std::size_t s = 0; s < times.size(); ++s) max_abs = std::max(max_abs, std::abs(volumes[i + 1][s] - volumes[i][s]));
        pairs.push_back({{"l_lo", ls[i]},
                         {"l_hi", ls[i + 1]},
                         {"max_rel_difference", max_abs_finite(rel.back())},
                         {"max_abs_difference", max_abs}});
    }
    io::CsvWriter w(dir / "converge.csv", header);
    for (std::size_t s = 0; s < times.size(); ++s) {
        std::vector<double> row{times[s]};
        for (const auto& v : volumes) row.push_back(v[s]);
        for (const auto& r : rel) row.push_back(r[s]);
        w.row(row);
    }
    w.close();
    manifest.add(dir / "converge.csv");

    bool monotone = true;
    for (std::size_t i = 1; i < pairs.size(); ++i) {
        monotone = monotone && pairs[i]["max_rel_difference"].get<double>() < pairs[i - 1]["max_rel_difference"].get<double>();
    }
    out.report["levels"] = levels;
    out.report["pairs"] = pairs;
    out.report["flags"] = {{"monotone_convergence", monotone}};
    detail::finish(out, dir, manifest, start);
    return out;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepPoint {
    std::string label;
    double intensity_w_cm2{0.0};
    int sign{1};
    bool reference{false};
};

inline std::string sweep_label(double intensity, int sign) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s%.3e", sign > 0 ? "p" : "m", intensity);
    return buf;
}

inline Outcome cmd_sweep(const RunConfig& c, const fs::path& dir) {
    const auto start = std::chrono::steady_clock::now();
    config::validate(c);
    if (c.field.shape == fields::Shape::none) {
        throw config::ConfigError("field.shape", "sweep needs a pulse shape (dc_flash or single_cycle_sine)");
    }
    fs::create_directories(dir);
    io::Manifest manifest(dir);
    Outcome out{kSuccess, detail::report_head("sweep", c)};

    std::vector<SweepPoint> points{{"field_free", 0.0, 1, true}};
    for (double inten : c.sweep.intensities_w_cm2) {
        for (int sign : c.sweep.signs) points.push_back({sweep_label(inten, sign), inten, sign, false});
    }

    const auto phys = resolve_physics(c, c.propagation.l_max);
    out.report["hierarchy"] = detail::hierarchy_json(phys);
    const int threads = resolve_threads(c);
    const int outer = std::max(1, std::min<int>(threads, static_cast<int>(points.size())));
    const int inner = std::max(1, threads / outer);

    std::vector<std::optional<MapRun>> runs(points.size());
    std::vector<std::string> errors(points.size());
    parallel_for(points.size(), outer, [&](std::size_t i) {
        config::FieldSection f = c.field;
        f.intensity_w_cm2 = points[i].intensity_w_cm2;
        f.sign = points[i].sign;
        try {
            runs[i] = run_map(c, phys, config::pulse_spec(f), inner);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    const auto first_bump = [](const MapRun& r) {
        return r.volume.nm.bumps.empty() ? detail::nan() : r.volume.nm.bumps.front().value;
    };
    const double ref_bump = runs[0] ? first_bump(*runs[0]) : detail::nan();

    io::CsvWriter table(dir / "sweep.csv", {"label", "intensity_w_cm2", "sign", "e0_au", "dressed_gap_min_au",
                                            "dressed_gap_max_au", "n_bumps", "first_bump_t_fs", "first_bump_V",
                                            "enhancement_ratio", "V_final", "linearity_error", "status"});
    json pts = json::array();
    bool any_failed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        const double e0 = p.sign * units::intensity_to_amplitude(p.intensity_w_cm2);
        json j = {{"label", p.label}, {"intensity_w_cm2", p.intensity_w_cm2}, {"sign", p.sign}, {"e0_au", e0},
                  {"reference", p.reference}};
        if (!runs[i]) {
            any_failed = true;
            j["status"] = "failed";
            j["error"] = errors[i];
            table.row_strings({p.label, io::num(p.intensity_w_cm2), std::to_string(p.sign), io::num(e0), "nan", "nan",
                               "0", "nan", "nan", "nan", "nan", "nan", "failed"});
            pts.push_back(j);
            continue;
        }
        const auto& r = *runs[i];
        if (!r.maps.reliable) any_failed = true;
        const auto gap = detail::dressed_gap_json(phys.params, r.maps.trajectories[0].field);
        const double fb = first_bump(r);
        const double fb_t = r.volume.nm.bumps.empty() ? detail::nan() : r.volume.nm.bumps.front().t_fs;
        const double ratio = fb / ref_bump;
        j["status"] = r.maps.reliable ? "ok" : "linearity_failed";
        j["dressed_gap"] = gap;
        j["map"] = map_summary(r);
        j["enhancement_ratio"] = detail::num_or_null(ratio);
        table.row_strings({p.label, io::num(p.intensity_w_cm2), std::to_string(p.sign), io::num(e0),
                           io::num(gap["min_au"].get<double>()), io::num(gap["max_au"].get<double>()),
                           std::to_string(r.volume.nm.bumps.size()), io::num(fb_t), io::num(fb), io::num(ratio),
                           io::num(r.volume.volume.back()), io::num(r.maps.linearity_error),
                           j["status"].get<std::string>()});
        pts.push_back(j);
    }
    table.close();
    manifest.add(dir / "sweep.csv");

    std::vector<std::string> header{"t_fs"};
    std::vector<std::size_t> ok;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (runs[i]) {
            header.push_back("V_" + points[i].label);
            ok.push_back(i);
        }
    }
    if (!ok.empty()) {
        io::CsvWriter w(dir / "sweep_volume.csv", header);
        const auto& t = runs[ok.front()]->volume.times_fs;
        for (std::size_t s = 0; s < t.size(); ++s) {
            std::vector<double> row{t[s]};
            for (auto i : ok) row.push_back(runs[i]->volume.volume[s]);
            w.row(row);
        }
        w.close();
        manifest.add(dir / "sweep_volume.csv");
    }

    out.report["points"] = pts;
    out.report["flags"] = {{"partial_failure", any_failed}};
    if (any_failed) out.exit_code = kCompletedWithFlags;
    detail::finish(out, dir, manifest, start);
    return out;
}

// ---------------------------------------------------------------------------
// bath-check

inline Outcome cmd_bath_check(const RunConfig& c, const fs::path& dir, double window_fs = 100.0,
                              std::size_t points = 1001) {
    const auto start = std::chrono::steady_clock::now();
    config::validate(c);
    fs::create_directories(dir);
    io::Manifest manifest(dir);
    Outcome out{kSuccess, detail::report_head("bath-check", c)};

    const auto resolved = config::resolve_bath(c);
    const auto& set = resolved.spec.lorentzians;

    {
        io::CsvWriter w(dir / "spectral_density.csv", {"omega_au", "J_au"});
        const double hi = 0.05;
        for (std::size_t i = 0; i <= 2000; ++i) {
            const double om = hi * static_cast<double>(i) / 2000.0;
            w.row({om, bath::spectral_density(om, set)});
        }
        w.close();
        manifest.add(dir / "spectral_density.csv");
    }

    const auto times = bath::time_grid_au(window_fs, points);
    const auto numeric = bath::sample_numeric(resolved.spec, times);
    const auto check = bath::compare_expansion(resolved.expansion, times, numeric);
    {
        io::CsvWriter w(dir / "correlation.csv", {"t_fs", "re_C_expansion", "im_C_expansion", "re_C_quadrature",
                                                  "im_C_quadrature", "rel_error"});
        const double scale = std::abs(numeric.front());
        for (std::size_t i = 0; i < times.size(); ++i) {
            const cplx e = resolved.expansion.value(times[i]);
            w.row({units::au_to_fs(times[i]), e.real(), e.imag(), numeric[i].real(), numeric[i].imag(),
                   std::abs(e - numeric[i]) / scale});
        }
        w.close();
        manifest.add(dir / "correlation.csv");
    }

    out.report["bath"] = {{"n_matsubara", resolved.spec.n_matsubara},
                          {"mode", c.bath.n_matsubara ? "fixed" : "auto"},
                          {"exponential_terms", resolved.expansion.size()},
                          {"beta_au", resolved.spec.beta()},
                          {"omega_max_au", bath::spectral_peak(set)},
                          {"c0_au", numeric.front().real()},
                          {"max_rel_error", check.max_rel_error},
                          {"window_fs", window_fs}};
    out.report["flags"] = {{"expansion_above_target", check.max_rel_error > c.bath.auto_target}};
    detail::finish(out, dir, manifest, start);
    return out;
}

}  // namespace heomstark::cli

// Run configuration in experimentalist units (eV, fs, K, W/cm^2).

#pragma once

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "heomstark/bath.hpp"
#include "heomstark/fields.hpp"
#include "heomstark/heom.hpp"
#include "heomstark/model.hpp"
#include "heomstark/units.hpp"

extern char** environ;

namespace heomstark::config {

using json = nlohmann::ordered_json;

// Validation failure; `key` is the dotted config path (e.g. field.period_fs).
struct ConfigError : std::invalid_argument {
    std::string key;
    ConfigError(std::string k, const std::string& msg) : std::invalid_argument(k + ": " + msg), key(std::move(k)) {}
};

enum class InitialKind { diabatic_1, diabatic_2, plus, plus_i, custom };

inline std::string to_string(InitialKind k) {
    switch (k) {
        case InitialKind::diabatic_1: return "diabatic_1";
        case InitialKind::diabatic_2: return "diabatic_2";
        case InitialKind::plus: return "plus";
        case InitialKind::plus_i: return "plus_i";
        case InitialKind::custom: return "custom";
    }
    return "?";
}

struct SystemSection {
    double diabatic_gap_ev{0.517};
    double w_ev{0.2};
    double mu0_au{1.0};

    bool operator==(const SystemSection&) const = default;
};

struct BathSection {
    double temperature_k{300.0};
    std::optional<int> n_matsubara{4};  // empty = auto
    double auto_target{1e-3};
    bath::GammaReading gamma_reading{bath::GammaReading::scaled_1e_minus4};
    std::optional<std::vector<bath::Lorentzian>> lorentzians;  // overrides the table when set

    bool operator==(const BathSection& o) const {
        auto same_terms = [](const auto& a, const auto& b) {
            if (a.has_value() != b.has_value()) return false;
            if (!a) return true;
            if (a->size() != b->size()) return false;
            for (std::size_t i = 0; i < a->size(); ++i) {
                if ((*a)[i].p != (*b)[i].p || (*a)[i].omega != (*b)[i].omega || (*a)[i].gamma != (*b)[i].gamma)
                    return false;
            }
            return true;
        };
        return temperature_k == o.temperature_k && n_matsubara == o.n_matsubara && auto_target == o.auto_target &&
               gamma_reading == o.gamma_reading && same_terms(lorentzians, o.lorentzians);
    }
};

struct FieldSection {
    fields::Shape shape{fields::Shape::none};
    double intensity_w_cm2{0.0};
    int sign{1};
    double period_fs{120.0};
    double start_fs{0.0};

    bool operator==(const FieldSection&) const = default;
};

struct AnalysisSection {
    double bump_prominence{0.005};
    double increase_tolerance{1e-8};

    bool operator==(const AnalysisSection&) const = default;
};

struct OutputSection {
    std::string directory{"out"};
    bool trajectory_csv{true};
    bool analysis_csv{true};
    bool ellipsoid_frames{true};
    bool checkpoint{false};

    bool operator==(const OutputSection&) const = default;
};

struct InitialState {
    InitialKind kind{InitialKind::diabatic_1};
    Mat2 custom{Mat2::Zero()};

    bool operator==(const InitialState& o) const {
        return kind == o.kind && (kind != InitialKind::custom || custom == o.custom);
    }
};

struct ConvergeSection {
    std::vector<int> l_values{3, 4, 5, 6};
    bool operator==(const ConvergeSection&) const = default;
};

struct SweepSection {
    std::vector<double> intensities_w_cm2{5e11, 1e12, 2e12, 3.5e12};
    std::vector<int> signs{1, -1};
    bool operator==(const SweepSection&) const = default;
};

struct RunConfig {
    SystemSection system;
    BathSection bath;
    FieldSection field;
    heom::PropagationConfig propagation;
    AnalysisSection analysis;
    OutputSection outputs;
    InitialState initial_state;
    ConvergeSection converge;
    SweepSection sweep;
    int threads{0};  // 0 = hardware concurrency

    bool operator==(const RunConfig& o) const {
        const auto& p = propagation;
        const auto& q = o.propagation;
        const bool same_prop = p.l_max == q.l_max && p.dt_au == q.dt_au && p.t_final_fs == q.t_final_fs &&
                               p.output_stride_fs == q.output_stride_fs && p.rescaling == q.rescaling &&
                               p.adaptive == q.adaptive && p.rel_tol == q.rel_tol && p.abs_tol == q.abs_tol &&
                               p.min_step_au == q.min_step_au && p.check_consistency == q.check_consistency;
        return same_prop && system == o.system && bath == o.bath && field == o.field && analysis == o.analysis &&
               outputs == o.outputs && initial_state == o.initial_state && converge == o.converge &&
               sweep == o.sweep && threads == o.threads;
    }
};

// ---------------------------------------------------------------------------
// JSON <-> RunConfig

inline std::string gamma_reading_name(bath::GammaReading r) {
    return r == bath::GammaReading::scaled_1e_minus4 ? "scaled_1e_minus4" : "as_printed_1e4";
}

inline json to_json(const RunConfig& c) {
    json j;
    j["system"] = {{"diabatic_gap_ev", c.system.diabatic_gap_ev},
                   {"w_ev", c.system.w_ev},
                   {"mu0_au", c.system.mu0_au}};
    json b = {{"temperature_k", c.bath.temperature_k}};
    if (c.bath.n_matsubara) b["n_matsubara"] = *c.bath.n_matsubara;
    else b["n_matsubara"] = "auto";
    b["auto_target"] = c.bath.auto_target;
    b["gamma_reading"] = gamma_reading_name(c.bath.gamma_reading);
    if (c.bath.lorentzians) {
        json terms = json::array();
        for (const auto& l : *c.bath.lorentzians) {
            terms.push_back({{"p_au", l.p}, {"omega_au", l.omega}, {"gamma_au", l.gamma}});
        }
        b["lorentzians"] = terms;
    }
    j["bath"] = b;
    j["field"] = {{"shape", fields::to_string(c.field.shape)},
                  {"intensity_w_cm2", c.field.intensity_w_cm2},
                  {"sign", c.field.sign},
                  {"period_fs", c.field.period_fs},
                  {"start_fs", c.field.start_fs}};
    const auto& p = c.propagation;
    j["propagation"] = {{"l_max", p.l_max},
                        {"dt_au", p.dt_au},
                        {"t_final_fs", p.t_final_fs},
                        {"output_stride_fs", p.output_stride_fs},
                        {"rescaling", p.rescaling},
                        {"adaptive", p.adaptive},
                        {"rel_tol", p.rel_tol},
                        {"abs_tol", p.abs_tol},
                        {"min_step_au", p.min_step_au},
                        {"check_consistency", p.check_consistency}};
    j["analysis"] = {{"bump_prominence", c.analysis.bump_prominence},
                     {"increase_tolerance", c.analysis.increase_tolerance}};
    j["outputs"] = {{"directory", c.outputs.directory},
                    {"trajectory_csv", c.outputs.trajectory_csv},
                    {"analysis_csv", c.outputs.analysis_csv},
                    {"ellipsoid_frames", c.outputs.ellipsoid_frames},
                    {"checkpoint", c.outputs.checkpoint}};
    json init = {{"kind", to_string(c.initial_state.kind)}};
    if (c.initial_state.kind == InitialKind::custom) {
        json rho = json::array();
        for (int r = 0; r < 2; ++r) {
            json row = json::array();
            for (int col = 0; col < 2; ++col) {
                row.push_back({c.initial_state.custom(r, col).real(), c.initial_state.custom(r, col).imag()});
            }
            rho.push_back(row);
        }
        init["rho"] = rho;
    }
    j["initial_state"] = init;
    j["converge"] = {{"l_values", c.converge.l_values}};
    j["sweep"] = {{"intensities_w_cm2", c.sweep.intensities_w_cm2}, {"signs", c.sweep.signs}};
    j["threads"] = c.threads;
    return j;
}

namespace detail {

template <class T>
void read(const json& section, const std::string& prefix, const char* key, T& out) {
    if (!section.contains(key)) return;
    try {
        out = section.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(prefix + "." + key, std::string("wrong type (") + e.what() + ")");
    }
}

inline void reject_unknown(const json& section, const std::string& prefix, std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : section.items()) {
        bool known = false;
        for (const char* name : keys) known = known || k == name;
        if (!known) throw ConfigError(prefix.empty() ? k : prefix + "." + k, "unknown key");
    }
}

inline const json& section(const json& j, const char* name) {
    static const json empty = json::object();
    if (!j.contains(name)) return empty;
    if (!j.at(name).is_object()) throw ConfigError(name, "must be an object");
    return j.at(name);
}

}  // namespace detail

// Overlays the keys present in `j` onto `c`.
inline void apply_json(RunConfig& c, const json& j) {
    using detail::read;
    if (!j.is_object()) throw ConfigError("<root>", "configuration must be a JSON object");
    detail::reject_unknown(j, "", {"system", "bath", "field", "propagation", "analysis", "outputs", "initial_state",
                                   "converge", "sweep", "threads"});

    const auto& s = detail::section(j, "system");
    detail::reject_unknown(s, "system", {"diabatic_gap_ev", "w_ev", "mu0_au"});
    read(s, "system", "diabatic_gap_ev", c.system.diabatic_gap_ev);
    read(s, "system", "w_ev", c.system.w_ev);
    read(s, "system", "mu0_au", c.system.mu0_au);

    const auto& b = detail::section(j, "bath");
    detail::reject_unknown(b, "bath", {"temperature_k", "n_matsubara", "auto_target", "gamma_reading", "lorentzians"});
    read(b, "bath", "temperature_k", c.bath.temperature_k);
    read(b, "bath", "auto_target", c.bath.auto_target);
    if (b.contains("n_matsubara")) {
        const auto& v = b.at("n_matsubara");
        if (v.is_string() && v.get<std::string>() == "auto") c.bath.n_matsubara.reset();
        else if (v.is_number_integer()) c.bath.n_matsubara = v.get<int>();
        else throw ConfigError("bath.n_matsubara", "expected a non-negative integer or \"auto\"");
    }
    if (b.contains("gamma_reading")) {
        std::string r;
        read(b, "bath", "gamma_reading", r);
        if (r == "scaled_1e_minus4") c.bath.gamma_reading = bath::GammaReading::scaled_1e_minus4;
        else if (r == "as_printed_1e4") c.bath.gamma_reading = bath::GammaReading::as_printed_1e4;
        else throw ConfigError("bath.gamma_reading", "expected \"scaled_1e_minus4\" or \"as_printed_1e4\"");
    }
    if (b.contains("lorentzians")) {
        const auto& arr = b.at("lorentzians");
        if (arr.is_null()) {
            c.bath.lorentzians.reset();
        } else {
            if (!arr.is_array()) throw ConfigError("bath.lorentzians", "must be an array");
            std::vector<bath::Lorentzian> terms;
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const std::string pre = "bath.lorentzians[" + std::to_string(i) + "]";
                bath::Lorentzian l;
                detail::reject_unknown(arr[i], pre, {"p_au", "omega_au", "gamma_au"});
                read(arr[i], pre, "p_au", l.p);
                read(arr[i], pre, "omega_au", l.omega);
                read(arr[i], pre, "gamma_au", l.gamma);
                terms.push_back(l);
            }
            c.bath.lorentzians = terms;
        }
    }

    const auto& f = detail::section(j, "field");
    detail::reject_unknown(f, "field", {"shape", "intensity_w_cm2", "sign", "period_fs", "start_fs"});
    if (f.contains("shape")) {
        std::string shape;
        read(f, "field", "shape", shape);
        try {
            c.field.shape = fields::shape_from_string(shape);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("field.shape", e.what());
        }
    }
    read(f, "field", "intensity_w_cm2", c.field.intensity_w_cm2);
    read(f, "field", "sign", c.field.sign);
    read(f, "field", "period_fs", c.field.period_fs);
    read(f, "field", "start_fs", c.field.start_fs);

    const auto& p = detail::section(j, "propagation");
    detail::reject_unknown(p, "propagation", {"l_max", "dt_au", "t_final_fs", "output_stride_fs", "rescaling",
                                              "adaptive", "rel_tol", "abs_tol", "min_step_au", "check_consistency"});
    read(p, "propagation", "l_max", c.propagation.l_max);
    read(p, "propagation", "dt_au", c.propagation.dt_au);
    read(p, "propagation", "t_final_fs", c.propagation.t_final_fs);
    read(p, "propagation", "output_stride_fs", c.propagation.output_stride_fs);
    read(p, "propagation", "rescaling", c.propagation.rescaling);
    read(p, "propagation", "adaptive", c.propagation.adaptive);
    read(p, "propagation", "rel_tol", c.propagation.rel_tol);
    read(p, "propagation", "abs_tol", c.propagation.abs_tol);
    read(p, "propagation", "min_step_au", c.propagation.min_step_au);
    read(p, "propagation", "check_consistency", c.propagation.check_consistency);

    const auto& a = detail::section(j, "analysis");
    detail::reject_unknown(a, "analysis", {"bump_prominence", "increase_tolerance"});
    read(a, "analysis", "bump_prominence", c.analysis.bump_prominence);
    read(a, "analysis", "increase_tolerance", c.analysis.increase_tolerance);

    const auto& o = detail::section(j, "outputs");
    detail::reject_unknown(o, "outputs", {"directory", "trajectory_csv", "analysis_csv", "ellipsoid_frames", "checkpoint"});
    read(o, "outputs", "directory", c.outputs.directory);
    read(o, "outputs", "trajectory_csv", c.outputs.trajectory_csv);
    read(o, "outputs", "analysis_csv", c.outputs.analysis_csv);
    read(o, "outputs", "ellipsoid_frames", c.outputs.ellipsoid_frames);
    read(o, "outputs", "checkpoint", c.outputs.checkpoint);

    const auto& init = detail::section(j, "initial_state");
    detail::reject_unknown(init, "initial_state", {"kind", "rho"});
    if (init.contains("kind")) {
        std::string k;
        read(init, "initial_state", "kind", k);
        if (k == "diabatic_1") c.initial_state.kind = InitialKind::diabatic_1;
        else if (k == "diabatic_2") c.initial_state.kind = InitialKind::diabatic_2;
        else if (k == "plus") c.initial_state.kind = InitialKind::plus;
        else if (k == "plus_i") c.initial_state.kind = InitialKind::plus_i;
        else if (k == "custom") c.initial_state.kind = InitialKind::custom;
        else throw ConfigError("initial_state.kind", "unknown kind '" + k + "'");
    }
    if (init.contains("rho")) {
        const auto& rho = init.at("rho");
        auto bad = [] { return ConfigError("initial_state.rho", "expected [[[re,im],[re,im]],[[re,im],[re,im]]]"); };
        if (!rho.is_array() || rho.size() != 2) throw bad();
        for (int r = 0; r < 2; ++r) {
            if (!rho[r].is_array() || rho[r].size() != 2) throw bad();
            for (int col = 0; col < 2; ++col) {
                const auto& e = rho[r][col];
                if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) throw bad();
                c.initial_state.custom(r, col) = {e[0].get<double>(), e[1].get<double>()};
            }
        }
    }

    const auto& cv = detail::section(j, "converge");
    detail::reject_unknown(cv, "converge", {"l_values"});
    read(cv, "converge", "l_values", c.converge.l_values);

    const auto& sw = detail::section(j, "sweep");
    detail::reject_unknown(sw, "sweep", {"intensities_w_cm2", "signs"});
    read(sw, "sweep", "intensities_w_cm2", c.sweep.intensities_w_cm2);
    read(sw, "sweep", "signs", c.sweep.signs);

    if (j.contains("threads")) {
        if (!j.at("threads").is_number_integer()) throw ConfigError("threads", "expected an integer");
        c.threads = j.at("threads").get<int>();
    }
}

inline void validate(const RunConfig& c) {
    auto require = [](bool ok, const char* key, const char* msg) {
        if (!ok) throw ConfigError(key, msg);
    };
    require(std::isfinite(c.system.diabatic_gap_ev), "system.diabatic_gap_ev", "must be finite");
    require(std::isfinite(c.system.w_ev), "system.w_ev", "must be finite");
    require(std::isfinite(c.system.mu0_au), "system.mu0_au", "must be finite");
    require(c.bath.temperature_k > 0, "bath.temperature_k", "must be > 0");
    require(!c.bath.n_matsubara || *c.bath.n_matsubara >= 0, "bath.n_matsubara", "must be >= 0");
    require(c.bath.auto_target > 0, "bath.auto_target", "must be > 0");
    if (c.bath.lorentzians) {
        require(!c.bath.lorentzians->empty(), "bath.lorentzians", "must not be empty");
        for (const auto& l : *c.bath.lorentzians) {
            require(l.p > 0 && l.omega > 0 && l.gamma > 0, "bath.lorentzians", "p_au, omega_au, gamma_au must be > 0");
        }
    }
    require(c.field.intensity_w_cm2 >= 0, "field.intensity_w_cm2", "must be >= 0");
    require(c.field.sign == 1 || c.field.sign == -1, "field.sign", "must be +1 or -1");
    require(c.field.period_fs > 0, "field.period_fs", "must be > 0");
    require(std::isfinite(c.field.start_fs), "field.start_fs", "must be finite");
    const auto& p = c.propagation;
    require(p.l_max >= 1, "propagation.l_max", "must be >= 1");
    require(p.dt_au > 0, "propagation.dt_au", "must be > 0");
    require(p.t_final_fs > 0, "propagation.t_final_fs", "must be > 0");
    require(p.output_stride_fs > 0, "propagation.output_stride_fs", "must be > 0");
    require(p.rel_tol > 0, "propagation.rel_tol", "must be > 0");
    require(p.abs_tol > 0, "propagation.abs_tol", "must be > 0");
    require(p.min_step_au > 0, "propagation.min_step_au", "must be > 0");
    require(c.analysis.bump_prominence >= 0, "analysis.bump_prominence", "must be >= 0");
    require(c.analysis.increase_tolerance >= 0, "analysis.increase_tolerance", "must be >= 0");
    require(!c.outputs.directory.empty(), "outputs.directory", "must not be empty");
    if (c.initial_state.kind == InitialKind::custom) {
        require(heom::is_density_matrix(c.initial_state.custom, 1e-9), "initial_state.rho",
                "must be Hermitian, unit trace and positive semidefinite");
    }
    require(c.converge.l_values.size() >= 2, "converge.l_values", "needs at least two entries");
    for (std::size_t i = 0; i < c.converge.l_values.size(); ++i) {
        require(c.converge.l_values[i] >= 1, "converge.l_values", "entries must be >= 1");
        if (i > 0) require(c.converge.l_values[i] >= c.converge.l_values[i - 1], "converge.l_values", "must be ascending");
    }
    require(!c.sweep.intensities_w_cm2.empty(), "sweep.intensities_w_cm2", "must not be empty");
    for (double v : c.sweep.intensities_w_cm2) require(v >= 0, "sweep.intensities_w_cm2", "entries must be >= 0");
    require(!c.sweep.signs.empty(), "sweep.signs", "must not be empty");
    for (int v : c.sweep.signs) require(v == 1 || v == -1, "sweep.signs", "entries must be +1 or -1");
    require(c.threads >= 0, "threads", "must be >= 0");
}

inline RunConfig parse(const json& j, RunConfig base = {}) {
    apply_json(base, j);
    validate(base);
    return base;
}

inline RunConfig parse(const std::string& text, RunConfig base = {}) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", e.what());
    }
    return parse(j, std::move(base));
}

inline std::string print(const RunConfig& c) { return to_json(c).dump(2); }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Presets

inline json preset(const std::string& name) {
    if (name == "fig2") {
        return {{"field", {{"shape", "none"}}},
                {"propagation", {{"t_final_fs", 100.0}}},
                {"converge", {{"l_values", {3, 4, 5, 6}}}}};
    }
    if (name == "fig4") {
        return {{"field", {{"shape", "dc_flash"}, {"intensity_w_cm2", 3.5e12}, {"sign", 1}, {"period_fs", 120.0}}},
                {"propagation", {{"t_final_fs", 100.0}}},
                {"sweep", {{"intensities_w_cm2", {5e11, 1e12, 2e12, 3.5e12}}, {"signs", {1}}}}};
    }
    if (name == "fig7") {
        return {{"field",
                 {{"shape", "single_cycle_sine"}, {"intensity_w_cm2", 3.5e12}, {"sign", 1}, {"period_fs", 40.0}}},
                {"propagation", {{"t_final_fs", 60.0}}},
                {"sweep", {{"intensities_w_cm2", {3.5e12}}, {"signs", {1, -1}}}}};
    }
    if (name == "smoke") {
        return {{"bath", {{"n_matsubara", 0}}},
                {"propagation", {{"l_max", 3}, {"t_final_fs", 20.0}}},
                {"converge", {{"l_values", {2, 3, 4}}}},
                {"sweep", {{"intensities_w_cm2", {0.0, 3.5e12}}, {"signs", {1, -1}}}}};
    }
    throw ConfigError("--preset", "unknown preset '" + name + "' (expected fig2, fig4, fig7 or smoke)");
}

// Period presets for the two single-cycle timescales.
inline json field_period_preset(const std::string& name) {
    if (name == "thz120fs") return {{"field", {{"period_fs", 120.0}}}};
    if (name == "thz40fs") return {{"field", {{"period_fs", 40.0}}}};
    throw ConfigError("field.period_preset", "unknown period preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// Environment overrides: HEOMSTARK_<SECTION>__<KEY>=<json value>, e.g.
// HEOMSTARK_FIELD__PERIOD_FS=40 or HEOMSTARK_THREADS=4. Values that are not
// valid JSON are taken as strings.

inline constexpr const char* kEnvPrefix = "HEOMSTARK_";

inline json env_overrides(char** env = environ) {
    json out = json::object();
    const std::string prefix = kEnvPrefix;
    for (char** e = env; e != nullptr && *e != nullptr; ++e) {
        const std::string entry = *e;
        if (entry.rfind(prefix, 0) != 0) continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos) continue;
        std::string path = entry.substr(prefix.size(), eq - prefix.size());
        const std::string raw = entry.substr(eq + 1);
        for (auto& ch : path) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::parse_error&) {
            value = raw;
        }
        json* node = &out;
        std::size_t start = 0;
        while (true) {
            const auto sep = path.find("__", start);
            const std::string key = path.substr(start, sep == std::string::npos ? std::string::npos : sep - start);
            if (sep == std::string::npos) {
                (*node)[key] = value;
                break;
            }
            node = &(*node)[key];
            start = sep + 2;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Layering: defaults, preset, config file, environment, then explicit flags.

struct Layers {
    std::string preset;
    std::string config_path;
    char** env{environ};
    std::optional<std::string> out_dir;
    std::optional<int> threads;
};

inline RunConfig resolve(const Layers& l) {
    RunConfig c;
    if (!l.preset.empty()) apply_json(c, preset(l.preset));
    if (!l.config_path.empty()) {
        json j;
        try {
            j = json::parse(read_file(l.config_path));
        } catch (const json::parse_error& e) {
            throw ConfigError(l.config_path, e.what());
        }
        apply_json(c, j);
    }
    apply_json(c, env_overrides(l.env));
    if (l.out_dir) c.outputs.directory = *l.out_dir;
    if (l.threads) c.threads = *l.threads;
    validate(c);
    return c;
}

// ---------------------------------------------------------------------------
// Resolved physics objects

inline SystemParams system_params(const RunConfig& c) {
    return SystemParams::from_ev(c.system.diabatic_gap_ev, c.system.w_ev, c.system.mu0_au);
}

inline bath::BathSpec bath_spec(const RunConfig& c) {
    bath::BathSpec b;
    b.lorentzians = c.bath.lorentzians ? bath::LorentzianSet{*c.bath.lorentzians}
                                       : bath::LorentzianSet::heterojunction(c.bath.gamma_reading);
    b.temperature = c.bath.temperature_k;
    b.n_matsubara = c.bath.n_matsubara.value_or(0);
    return b;
}

struct ResolvedBath {
    bath::BathSpec spec;
    bath::CorrelationExpansion expansion;
    std::optional<double> auto_error;  // set when the count was chosen automatically
};

inline ResolvedBath resolve_bath(const RunConfig& c) {
    auto spec = bath_spec(c);
    if (c.bath.n_matsubara) return {spec, bath::decompose_correlation(spec), std::nullopt};
    auto a = bath::decompose_correlation_auto(spec, c.bath.auto_target);
    spec.n_matsubara = a.n_matsubara;
    return {spec, std::move(a.expansion), a.max_rel_error};
}

inline fields::PulseSpec pulse_spec(const FieldSection& f) {
    fields::PulseSpec p;
    p.shape = f.shape;
    p.amplitude_e0 = f.sign * units::intensity_to_amplitude(f.intensity_w_cm2);
    p.period_fs = f.period_fs;
    p.start_fs = f.start_fs;
    if (p.amplitude_e0 == 0.0) p.shape = fields::Shape::none;
    return p;
}

inline fields::PulseSpec pulse_spec(const RunConfig& c) { return pulse_spec(c.field); }

inline Mat2 initial_density(const InitialState& s) {
    Mat2 rho;
    switch (s.kind) {
        case InitialKind::diabatic_1: rho << 1, 0, 0, 0; break;
        case InitialKind::diabatic_2: rho << 0, 0, 0, 1; break;
        case InitialKind::plus: rho << 0.5, 0.5, 0.5, 0.5; break;
        case InitialKind::plus_i: rho << 0.5, cplx(0, -0.5), cplx(0, 0.5), 0.5; break;
        case InitialKind::custom: rho = s.custom; break;
    }
    return rho;
}

}  // namespace heomstark::config

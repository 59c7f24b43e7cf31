#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "fusionlab/eval/suite.hpp"
#include "fusionlab/io/format.hpp"
#include "fusionlab/sim/scenario.hpp"
#include "fusionlab/tuning/ukf_tuner.hpp"

namespace fusionlab::io {

namespace fs = std::filesystem;

/// Invalid or malformed configuration. what() reads "file:line: message"
/// when the location is known.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string where(const std::string& source, const YAML::Node& n) {
    const auto m = n.Mark();
    if (m.is_null()) return source;
    return source + ":" + std::to_string(m.line + 1);
}

[[noreturn]] inline void fail(const std::string& source, const YAML::Node& n, const std::string& msg) {
    throw ConfigError(where(source, n) + ": " + msg);
}

/// Typed read with a located diagnostic on conversion failure.
template <class T>
T get(const std::string& src, const YAML::Node& parent, const char* key) {
    const YAML::Node n = parent[key];
    if (!n) fail(src, parent, std::string("missing key '") + key + "'");
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        fail(src, n, std::string("bad value for '") + key + "'");
    }
}

template <class T>
T get_or(const std::string& src, const YAML::Node& parent, const char* key, T fallback) {
    if (!parent[key]) return fallback;
    return get<T>(src, parent, key);
}

inline void require_map(const std::string& src, const YAML::Node& n, const char* what) {
    if (!n.IsMap()) fail(src, n, std::string(what) + " must be a mapping");
}

/// Rejects keys outside `allowed`, so typos do not pass silently.
inline void check_keys(const std::string& src, const YAML::Node& n,
                       std::initializer_list<std::string_view> allowed) {
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        bool ok = false;
        for (auto a : allowed) ok |= key == a;
        if (!ok) fail(src, kv.first, "unknown key '" + key + "'");
    }
}

inline YAML::Node load(const std::string& text, const std::string& source) {
    try {
        return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
}

}  // namespace detail

/// Reads a whole file; throws std::ios_base::failure when unreadable.
inline std::string read_text(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::ios_base::failure("cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::ios_base::failure("cannot write " + path.string());
    f << text;
    if (!f) throw std::ios_base::failure("write failed: " + path.string());
}

// ---------------------------------------------------------------- scenarios

/// Scenario suite: explicit `scenarios` entries and/or a maneuver x
/// environment `matrix`, plus the trial protocol.
struct SuiteSpec {
    std::string name = "suite";
    std::uint64_t base_seed = 0;
    std::size_t n_trials = 20;
    double train_fraction = 0.7;
    std::vector<sim::ScenarioConfig> cells;
};

namespace detail {

inline void read_profile(const std::string& src, const YAML::Node& n, sim::ProfileParams& p) {
    p.turn_speed = get_or(src, n, "turn_speed", p.turn_speed);
    p.turn_start_s = get_or(src, n, "turn_start_s", p.turn_start_s);
    p.turn_duration_s = get_or(src, n, "turn_duration_s", p.turn_duration_s);
    p.brake_start_s = get_or(src, n, "brake_start_s", p.brake_start_s);
    p.outage_speed = get_or(src, n, "outage_speed", p.outage_speed);
    p.weave_amplitude = get_or(src, n, "weave_amplitude", p.weave_amplitude);
    p.weave_period_s = get_or(src, n, "weave_period_s", p.weave_period_s);
    p.outage_count = get_or(src, n, "outage_count", p.outage_count);
}

inline constexpr std::array<std::string_view, 8> kProfileKeys = {
    "turn_speed",      "turn_start_s", "turn_duration_s", "brake_start_s",
    "outage_speed",    "weave_amplitude", "weave_period_s", "outage_count"};

inline void read_noise(const std::string& src, const YAML::Node& n, sim::NoiseProfile& p) {
    require_map(src, n, "noise");
    check_keys(src, n,
               {"gps_sigma", "accel_sigma", "gyro_sigma", "accel_bias_walk", "gyro_bias_walk",
                "lateral_accel_factor", "initial_accel_bias", "initial_gyro_bias"});
    p.gps_sigma = get_or(src, n, "gps_sigma", p.gps_sigma);
    p.accel_sigma = get_or(src, n, "accel_sigma", p.accel_sigma);
    p.gyro_sigma = get_or(src, n, "gyro_sigma", p.gyro_sigma);
    p.accel_bias_walk = get_or(src, n, "accel_bias_walk", p.accel_bias_walk);
    p.gyro_bias_walk = get_or(src, n, "gyro_bias_walk", p.gyro_bias_walk);
    p.lateral_accel_factor = get_or(src, n, "lateral_accel_factor", p.lateral_accel_factor);
    p.initial_accel_bias = get_or(src, n, "initial_accel_bias", p.initial_accel_bias);
    p.initial_gyro_bias = get_or(src, n, "initial_gyro_bias", p.initial_gyro_bias);
}

inline sim::Maneuver maneuver_of(const std::string& src, const YAML::Node& n) {
    const auto s = n.as<std::string>();
    if (auto m = sim::parse_maneuver(s)) return *m;
    fail(src, n, "unknown maneuver '" + s + "'");
}

inline sim::Environment environment_of(const std::string& src, const YAML::Node& n) {
    const auto s = n.as<std::string>();
    if (auto e = sim::parse_environment(s)) return *e;
    fail(src, n, "unknown environment '" + s + "'");
}

/// Fields shared by explicit scenarios and matrix rows. `initial_heading`
/// is "random" or a number in radians.
inline void read_common(const std::string& src, const YAML::Node& n, sim::ScenarioConfig& c,
                        bool& random_heading) {
    c.duration_s = get_or(src, n, "duration_s", c.duration_s);
    c.imu_rate_hz = get_or(src, n, "imu_rate_hz", c.imu_rate_hz);
    c.gps_rate_hz = get_or(src, n, "gps_rate_hz", c.gps_rate_hz);
    if (n["initial_heading"]) {
        const YAML::Node h = n["initial_heading"];
        if (h.as<std::string>() == "random") {
            random_heading = true;
        } else {
            random_heading = false;
            c.profile.initial_heading = get<double>(src, n, "initial_heading");
        }
    }
    read_profile(src, n, c.profile);
    if (n["noise"]) read_noise(src, n["noise"], c.noise);
}

inline void finish_cell(const std::string& src, const YAML::Node& n, sim::ScenarioConfig& c,
                        bool random_heading) {
    if (random_heading) c.profile.initial_heading = sim::draw_initial_heading(c.seed);
    if (c.maneuver == sim::Maneuver::GpsOutage3to5s && c.outage_windows.empty())
        c.outage_windows = sim::place_outage_windows(c);
    try {
        c.validate();
    } catch (const sim::ScenarioError& e) {
        fail(src, n, std::string("scenario '") + c.name + "': " + e.what());
    }
}

}  // namespace detail

/// `seed_override` replaces base_seed before cell seeds are derived.
inline SuiteSpec parse_suite(const std::string& text, const std::string& source,
                             std::optional<std::uint64_t> seed_override = std::nullopt) {
    using namespace detail;
    const YAML::Node root = load(text, source);
    if (!root.IsMap()) throw ConfigError(source + ": top level must be a mapping");
    check_keys(source, root,
               {"name", "base_seed", "trials", "train_fraction", "defaults", "matrix", "scenarios"});
    SuiteSpec s;
    s.name = get_or<std::string>(source, root, "name", s.name);
    s.base_seed = get_or<std::uint64_t>(source, root, "base_seed", s.base_seed);
    if (seed_override) s.base_seed = *seed_override;
    s.n_trials = get_or<std::size_t>(source, root, "trials", s.n_trials);
    s.train_fraction = get_or(source, root, "train_fraction", s.train_fraction);
    if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0))
        fail(source, root["train_fraction"], "train_fraction must lie in (0, 1)");

    sim::ScenarioConfig base;
    bool base_random = false;
    if (const YAML::Node d = root["defaults"]) {
        require_map(source, d, "defaults");
        std::vector<std::string_view> keys{"duration_s", "imu_rate_hz", "gps_rate_hz", "initial_heading", "noise"};
        keys.insert(keys.end(), kProfileKeys.begin(), kProfileKeys.end());
        for (const auto& kv : d) {
            const auto k = kv.first.as<std::string>();
            if (std::find(keys.begin(), keys.end(), k) == keys.end())
                fail(source, kv.first, "unknown key '" + k + "'");
        }
        read_common(source, d, base, base_random);
    }

    auto next_seed = [&] { return derive_seed(s.base_seed, 0x63656c6cULL + s.cells.size()); };

    if (const YAML::Node mx = root["matrix"]) {
        require_map(source, mx, "matrix");
        check_keys(source, mx, {"maneuvers", "environments"});
        const YAML::Node ms = mx["maneuvers"];
        const YAML::Node es = mx["environments"];
        if (!ms || !ms.IsMap()) fail(source, mx, "matrix.maneuvers must map maneuver -> settings");
        if (!es || !es.IsSequence() || es.size() == 0)
            fail(source, mx, "matrix.environments must be a non-empty list");
        for (const auto& kv : ms) {
            const sim::Maneuver m = maneuver_of(source, kv.first);
            for (const auto& en : es) {
                sim::ScenarioConfig c = base;
                bool random_heading = base_random;
                c.maneuver = m;
                c.environment = environment_of(source, en);
                c.noise = sim::noise_for(c.environment);
                c.name = std::string(sim::to_string(m)) + "_" + std::string(sim::to_string(c.environment));
                if (kv.second && !kv.second.IsNull()) {
                    require_map(source, kv.second, "maneuver settings");
                    read_common(source, kv.second, c, random_heading);
                }
                c.seed = next_seed();
                finish_cell(source, kv.second ? kv.second : kv.first, c, random_heading);
                s.cells.push_back(std::move(c));
            }
        }
    }

    if (const YAML::Node sc = root["scenarios"]) {
        if (!sc.IsSequence()) fail(source, sc, "scenarios must be a list");
        for (const auto& n : sc) {
            require_map(source, n, "scenario");
            std::vector<std::string_view> keys{"name", "maneuver", "environment", "seed", "outage_windows",
                                               "duration_s", "imu_rate_hz", "gps_rate_hz",
                                               "initial_heading", "noise"};
            keys.insert(keys.end(), kProfileKeys.begin(), kProfileKeys.end());
            for (const auto& kv : n) {
                const auto k = kv.first.as<std::string>();
                if (std::find(keys.begin(), keys.end(), k) == keys.end())
                    fail(source, kv.first, "unknown key '" + k + "'");
            }
            sim::ScenarioConfig c = base;
            bool random_heading = base_random;
            if (!n["maneuver"]) fail(source, n, "missing key 'maneuver'");
            c.maneuver = maneuver_of(source, n["maneuver"]);
            c.environment = n["environment"] ? environment_of(source, n["environment"]) : sim::Environment::Clear;
            c.noise = sim::noise_for(c.environment);
            c.name = get_or<std::string>(source, n, "name",
                                         std::string(sim::to_string(c.maneuver)) + "_" +
                                             std::string(sim::to_string(c.environment)));
            read_common(source, n, c, random_heading);
            c.seed = n["seed"] ? get<std::uint64_t>(source, n, "seed") : next_seed();
            if (const YAML::Node ws = n["outage_windows"]) {
                if (!ws.IsSequence()) fail(source, ws, "outage_windows must be a list of [start, end]");
                for (const auto& w : ws) {
                    if (!w.IsSequence() || w.size() != 2) fail(source, w, "outage window must be [start, end]");
                    try {
                        c.outage_windows.push_back({w[0].as<double>(), w[1].as<double>()});
                    } catch (const YAML::Exception&) {
                        fail(source, w, "outage window bounds must be numbers");
                    }
                }
            }
            finish_cell(source, n, c, random_heading);
            s.cells.push_back(std::move(c));
        }
    }
    if (s.cells.empty()) throw ConfigError(source + ": no scenarios defined (need 'matrix' or 'scenarios')");
    for (std::size_t i = 0; i < s.cells.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (s.cells[i].name == s.cells[j].name)
                throw ConfigError(source + ": duplicate scenario name '" + s.cells[i].name + "'");
    return s;
}

inline SuiteSpec load_suite(const fs::path& path, std::optional<std::uint64_t> seed_override = std::nullopt) {
    return parse_suite(read_text(path), path.string(), seed_override);
}

/// Fully resolved scenario, round-trippable through parse_scenario.
inline std::string emit_scenario(const sim::ScenarioConfig& c) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << c.name;
    e << YAML::Key << "maneuver" << YAML::Value << std::string(sim::to_string(c.maneuver));
    e << YAML::Key << "environment" << YAML::Value << std::string(sim::to_string(c.environment));
    e << YAML::Key << "seed" << YAML::Value << c.seed;
    e << YAML::Key << "start_s" << YAML::Value << format_exact(c.start_s);
    e << YAML::Key << "duration_s" << YAML::Value << format_exact(c.duration_s);
    e << YAML::Key << "imu_rate_hz" << YAML::Value << c.imu_rate_hz;
    e << YAML::Key << "gps_rate_hz" << YAML::Value << c.gps_rate_hz;
    e << YAML::Key << "initial_heading" << YAML::Value << format_exact(c.profile.initial_heading);
    const auto& p = c.profile;
    e << YAML::Key << "profile" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "turn_speed" << YAML::Value << format_exact(p.turn_speed);
    e << YAML::Key << "turn_start_s" << YAML::Value << format_exact(p.turn_start_s);
    e << YAML::Key << "turn_duration_s" << YAML::Value << format_exact(p.turn_duration_s);
    e << YAML::Key << "brake_start_s" << YAML::Value << format_exact(p.brake_start_s);
    e << YAML::Key << "outage_speed" << YAML::Value << format_exact(p.outage_speed);
    e << YAML::Key << "weave_amplitude" << YAML::Value << format_exact(p.weave_amplitude);
    e << YAML::Key << "weave_period_s" << YAML::Value << format_exact(p.weave_period_s);
    e << YAML::Key << "outage_count" << YAML::Value << p.outage_count;
    e << YAML::EndMap;
    const auto& n = c.noise;
    e << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "gps_sigma" << YAML::Value << format_exact(n.gps_sigma);
    e << YAML::Key << "accel_sigma" << YAML::Value << format_exact(n.accel_sigma);
    e << YAML::Key << "gyro_sigma" << YAML::Value << format_exact(n.gyro_sigma);
    e << YAML::Key << "accel_bias_walk" << YAML::Value << format_exact(n.accel_bias_walk);
    e << YAML::Key << "gyro_bias_walk" << YAML::Value << format_exact(n.gyro_bias_walk);
    e << YAML::Key << "lateral_accel_factor" << YAML::Value << format_exact(n.lateral_accel_factor);
    e << YAML::Key << "initial_accel_bias" << YAML::Value << format_exact(n.initial_accel_bias);
    e << YAML::Key << "initial_gyro_bias" << YAML::Value << format_exact(n.initial_gyro_bias);
    e << YAML::EndMap;
    e << YAML::Key << "outage_windows" << YAML::Value << YAML::BeginSeq;
    for (const auto& w : c.outage_windows)
        e << YAML::Flow << YAML::BeginSeq << format_exact(w.start_s) << format_exact(w.end_s) << YAML::EndSeq;
    e << YAML::EndSeq;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

inline sim::ScenarioConfig parse_scenario(const std::string& text, const std::string& source) {
    using namespace detail;
    const YAML::Node n = load(text, source);
    if (!n.IsMap()) throw ConfigError(source + ": scenario must be a mapping");
    sim::ScenarioConfig c;
    c.name = get<std::string>(source, n, "name");
    c.maneuver = maneuver_of(source, n["maneuver"]);
    c.environment = environment_of(source, n["environment"]);
    c.seed = get<std::uint64_t>(source, n, "seed");
    c.start_s = get<double>(source, n, "start_s");
    c.duration_s = get<double>(source, n, "duration_s");
    c.imu_rate_hz = get<int>(source, n, "imu_rate_hz");
    c.gps_rate_hz = get<int>(source, n, "gps_rate_hz");
    c.profile.initial_heading = get<double>(source, n, "initial_heading");
    if (n["profile"]) read_profile(source, n["profile"], c.profile);
    if (n["noise"]) read_noise(source, n["noise"], c.noise);
    if (const YAML::Node ws = n["outage_windows"])
        for (const auto& w : ws) c.outage_windows.push_back({w[0].as<double>(), w[1].as<double>()});
    try {
        c.validate();
    } catch (const sim::ScenarioError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return c;
}

// ------------------------------------------------------------------ tuning

namespace detail {

inline void read_range(const std::string& src, const YAML::Node& n, const char* key, double& lo, double& hi) {
    const YAML::Node r = n[key];
    if (!r) return;
    if (!r.IsSequence() || r.size() != 2) fail(src, r, std::string(key) + " must be [lower, upper]");
    try {
        lo = r[0].as<double>();
        hi = r[1].as<double>();
    } catch (const YAML::Exception&) {
        fail(src, r, std::string(key) + " bounds must be numbers");
    }
}

}  // namespace detail

inline tuning::TuningConfig parse_tuning(const std::string& text, const std::string& source) {
    using namespace detail;
    const YAML::Node root = load(text, source);
    if (!root.IsMap()) throw ConfigError(source + ": top level must be a mapping");
    check_keys(source, root, {"train_fraction", "scope", "layout", "target", "swarm", "bounds"});
    tuning::TuningConfig c;
    c.train_fraction = get_or(source, root, "train_fraction", c.train_fraction);
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0))
        fail(source, root["train_fraction"], "train_fraction must lie in (0, 1)");
    if (const YAML::Node s = root["scope"]) {
        const auto v = s.as<std::string>();
        if (v == "aggregate") c.scope = tuning::FitnessScope::Aggregate;
        else if (v == "per_cell") c.scope = tuning::FitnessScope::PerCell;
        else fail(source, s, "scope must be 'aggregate' or 'per_cell'");
    }
    if (const YAML::Node l = root["layout"]) {
        const auto v = l.as<std::string>();
        if (v == "diagonal") c.layout = tuning::NoiseLayout::Diagonal;
        else if (v == "isotropic") c.layout = tuning::NoiseLayout::Isotropic;
        else fail(source, l, "layout must be 'diagonal' or 'isotropic'");
    }
    if (const YAML::Node t = root["target"]) {
        const auto v = t.as<std::string>();
        if (v == "truth") c.target = tuning::FitnessTarget::Truth;
        else if (v == "gps") c.target = tuning::FitnessTarget::Gps;
        else fail(source, t, "target must be 'truth' or 'gps'");
    }
    if (const YAML::Node s = root["swarm"]) {
        require_map(source, s, "swarm");
        check_keys(source, s,
                   {"particles", "generations", "c1", "c2", "inertia", "inertia_start", "inertia_end",
                    "v_max_fraction", "seed"});
        auto& w = c.swarm;
        w.n_particles = get_or(source, s, "particles", w.n_particles);
        w.n_generations = get_or(source, s, "generations", w.n_generations);
        w.c1 = get_or(source, s, "c1", w.c1);
        w.c2 = get_or(source, s, "c2", w.c2);
        if (s["inertia"]) w.inertia_start = w.inertia_end = get<double>(source, s, "inertia");
        w.inertia_start = get_or(source, s, "inertia_start", w.inertia_start);
        w.inertia_end = get_or(source, s, "inertia_end", w.inertia_end);
        w.v_max_fraction = get_or(source, s, "v_max_fraction", w.v_max_fraction);
        w.seed = get_or<std::uint64_t>(source, s, "seed", w.seed);
        try {
            w.validate();
        } catch (const std::invalid_argument& e) {
            fail(source, s, e.what());
        }
    }
    c.bounds = tuning::default_bounds(c.layout);
    if (const YAML::Node b = root["bounds"]) {
        require_map(source, b, "bounds");
        check_keys(source, b, {"alpha", "beta", "kappa", "q", "r"});
        auto& B = c.bounds;
        read_range(source, b, "alpha", B.lower[0], B.upper[0]);
        read_range(source, b, "beta", B.lower[1], B.upper[1]);
        read_range(source, b, "kappa", B.lower[2], B.upper[2]);
        const int m = tuning::q_count(c.layout);
        const int n = tuning::r_count(c.layout);
        for (int i = 0; i < m; ++i) read_range(source, b, "q", B.lower[3 + i], B.upper[3 + i]);
        for (int i = 0; i < n; ++i) read_range(source, b, "r", B.lower[3 + m + i], B.upper[3 + m + i]);
        try {
            B.validate();
        } catch (const std::invalid_argument& e) {
            fail(source, b, e.what());
        }
    }
    return c;
}

inline tuning::TuningConfig load_tuning(const fs::path& path) {
    return parse_tuning(read_text(path), path.string());
}

// -------------------------------------------------------------- evaluation

struct EvaluationSpec {
    std::vector<eval::Method> methods{eval::kAllMethods.begin(), eval::kAllMethods.end()};
    eval::MethodParams baseline;
    std::string overlay_scenario;  // empty: first scenario
    std::size_t overlay_trial = 0;
    int bench_repetitions = 5;
};

namespace detail {

/// Filter params from {alpha, beta, kappa, q, r}; q/r are a scalar or a
/// per-axis list.
inline filter::FilterParams read_params(const std::string& src, const YAML::Node& n,
                                        filter::FilterParams p = filter::FilterParams::manual_default()) {
    require_map(src, n, "params");
    check_keys(src, n, {"alpha", "beta", "kappa", "q", "r"});
    p.alpha = get_or(src, n, "alpha", p.alpha);
    p.beta = get_or(src, n, "beta", p.beta);
    p.kappa = get_or(src, n, "kappa", p.kappa);
    auto vec = [&](const char* key, auto& out) {
        const YAML::Node v = n[key];
        if (!v) return;
        try {
            if (v.IsScalar()) {
                out.setConstant(v.as<double>());
            } else {
                if (!v.IsSequence() || static_cast<int>(v.size()) != out.size())
                    fail(src, v, std::string(key) + " must be a number or a list of " + std::to_string(out.size()));
                for (int i = 0; i < out.size(); ++i) out(i) = v[static_cast<std::size_t>(i)].as<double>();
            }
        } catch (const YAML::Exception&) {
            fail(src, v, std::string("bad value for '") + key + "'");
        }
    };
    vec("q", p.q_diag);
    vec("r", p.r_diag);
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        fail(src, n, e.what());
    }
    return p;
}

}  // namespace detail

inline EvaluationSpec parse_evaluation(const std::string& text, const std::string& source) {
    using namespace detail;
    const YAML::Node root = load(text, source);
    EvaluationSpec s;
    if (root.IsNull()) return s;
    if (!root.IsMap()) throw ConfigError(source + ": top level must be a mapping");
    check_keys(source, root, {"methods", "manual", "adaptive", "overlay", "benchmark"});
    if (const YAML::Node m = root["methods"]) {
        if (!m.IsSequence() || m.size() == 0) fail(source, m, "methods must be a non-empty list");
        s.methods.clear();
        for (const auto& v : m) {
            try {
                s.methods.push_back(eval::parse_method(v.as<std::string>()));
            } catch (const std::invalid_argument& e) {
                fail(source, v, e.what());
            }
        }
    }
    if (const YAML::Node m = root["manual"]) s.baseline.manual = read_params(source, m);
    if (const YAML::Node a = root["adaptive"]) {
        require_map(source, a, "adaptive");
        check_keys(source, a, {"window", "floor"});
        s.baseline.adaptive.window = get_or<std::size_t>(source, a, "window", s.baseline.adaptive.window);
        s.baseline.adaptive.floor = get_or(source, a, "floor", s.baseline.adaptive.floor);
        if (s.baseline.adaptive.window == 0) fail(source, a, "adaptive.window must be > 0");
    }
    if (const YAML::Node o = root["overlay"]) {
        require_map(source, o, "overlay");
        check_keys(source, o, {"scenario", "trial"});
        s.overlay_scenario = get_or<std::string>(source, o, "scenario", "");
        s.overlay_trial = get_or<std::size_t>(source, o, "trial", 0);
    }
    if (const YAML::Node b = root["benchmark"]) {
        require_map(source, b, "benchmark");
        check_keys(source, b, {"repetitions"});
        s.bench_repetitions = get_or(source, b, "repetitions", s.bench_repetitions);
    }
    return s;
}

inline EvaluationSpec load_evaluation(const fs::path& path) {
    return parse_evaluation(read_text(path), path.string());
}

// ------------------------------------------------------------ tuned params

/// Tuned parameters per trial and cell, as written by the tune command.
struct TunedParams {
    tuning::FitnessScope scope = tuning::FitnessScope::Aggregate;
    struct Cell {
        std::string scenario;  // "*" for the aggregate entry
        filter::FilterParams params;
        double best_fitness = 0.0;
    };
    struct Trial {
        std::size_t trial = 0;
        std::uint64_t seed = 0;
        std::vector<Cell> cells;
        std::vector<double> history;
        std::size_t evaluations = 0;
    };
    std::vector<Trial> trials;
    std::optional<filter::FilterParams> fixed;  // one parameter set for everything

    filter::FilterParams lookup(std::size_t trial, const std::string& scenario) const {
        if (fixed) return *fixed;
        for (const auto& t : trials) {
            if (t.trial != trial) continue;
            for (const auto& c : t.cells)
                if (c.scenario == "*" || c.scenario == scenario) return c.params;
            throw ConfigError("tuned params: no entry for scenario '" + scenario + "' in trial " +
                              std::to_string(trial));
        }
        throw ConfigError("tuned params: no entry for trial " + std::to_string(trial));
    }
};

namespace detail {

inline void emit_params(YAML::Emitter& e, const filter::FilterParams& p) {
    e << YAML::BeginMap;
    e << YAML::Key << "alpha" << YAML::Value << format_exact(p.alpha);
    e << YAML::Key << "beta" << YAML::Value << format_exact(p.beta);
    e << YAML::Key << "kappa" << YAML::Value << format_exact(p.kappa);
    e << YAML::Key << "q" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (int i = 0; i < p.q_diag.size(); ++i) e << format_exact(p.q_diag(i));
    e << YAML::EndSeq;
    e << YAML::Key << "r" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (int i = 0; i < p.r_diag.size(); ++i) e << format_exact(p.r_diag(i));
    e << YAML::EndSeq;
    e << YAML::EndMap;
}

}  // namespace detail

inline std::string emit_tuned(const TunedParams& t) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "scope" << YAML::Value
      << (t.scope == tuning::FitnessScope::Aggregate ? "aggregate" : "per_cell");
    e << YAML::Key << "trials" << YAML::Value << YAML::BeginSeq;
    for (const auto& tr : t.trials) {
        e << YAML::BeginMap;
        e << YAML::Key << "trial" << YAML::Value << tr.trial;
        e << YAML::Key << "seed" << YAML::Value << tr.seed;
        e << YAML::Key << "evaluations" << YAML::Value << tr.evaluations;
        e << YAML::Key << "cells" << YAML::Value << YAML::BeginSeq;
        for (const auto& c : tr.cells) {
            e << YAML::BeginMap;
            e << YAML::Key << "scenario" << YAML::Value << c.scenario;
            e << YAML::Key << "best_fitness" << YAML::Value << format_exact(c.best_fitness);
            e << YAML::Key << "decision_vector" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (double v : tuning::encode(c.params)) e << format_exact(v);
            e << YAML::EndSeq;
            e << YAML::Key << "params" << YAML::Value;
            detail::emit_params(e, c.params);
            e << YAML::EndMap;
        }
        e << YAML::EndSeq;
        e << YAML::Key << "history" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (double v : tr.history) e << format_exact(v);
        e << YAML::EndSeq;
        e << YAML::EndMap;
    }
    e << YAML::EndSeq;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

/// Accepts the tune command's output or a bare {params: {...}} file that
/// applies one parameter set everywhere.
inline TunedParams parse_tuned(const std::string& text, const std::string& source) {
    using namespace detail;
    const YAML::Node root = load(text, source);
    if (!root.IsMap()) throw ConfigError(source + ": top level must be a mapping");
    TunedParams t;
    if (root["params"]) {
        check_keys(source, root, {"params"});
        t.fixed = read_params(source, root["params"]);
        return t;
    }
    check_keys(source, root, {"scope", "trials"});
    const auto scope = get<std::string>(source, root, "scope");
    t.scope = scope == "per_cell" ? tuning::FitnessScope::PerCell : tuning::FitnessScope::Aggregate;
    const YAML::Node trials = root["trials"];
    if (!trials || !trials.IsSequence()) fail(source, root, "trials must be a list");
    for (const auto& tn : trials) {
        TunedParams::Trial tr;
        tr.trial = get<std::size_t>(source, tn, "trial");
        tr.seed = get<std::uint64_t>(source, tn, "seed");
        tr.evaluations = get_or<std::size_t>(source, tn, "evaluations", 0);
        for (const auto& cn : tn["cells"]) {
            TunedParams::Cell c;
            c.scenario = get<std::string>(source, cn, "scenario");
            c.best_fitness = get<double>(source, cn, "best_fitness");
            c.params = read_params(source, cn["params"]);
            tr.cells.push_back(std::move(c));
        }
        if (const YAML::Node h = tn["history"])
            for (const auto& v : h) tr.history.push_back(v.as<double>());
        t.trials.push_back(std::move(tr));
    }
    return t;
}

inline TunedParams load_tuned(const fs::path& path) { return parse_tuned(read_text(path), path.string()); }

}  // namespace fusionlab::io

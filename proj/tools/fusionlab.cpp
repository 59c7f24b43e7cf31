#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fusionlab/eval/report.hpp"
#include "fusionlab/eval/runtime.hpp"
#include "fusionlab/eval/suite.hpp"
#include "fusionlab/io/config.hpp"
#include "fusionlab/io/dataset_store.hpp"
#include "fusionlab/io/manifest.hpp"
#include "fusionlab/parallel.hpp"

namespace fs = std::filesystem;
using namespace fusionlab;

namespace {

enum Exit : int { kOk = 0, kConfig = 2, kIo = 3, kNumerical = 4 };

/// Error carrying its exit code.
struct Failure {
    int code;
    std::string message;
};

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string out;
    int threads = 0;
    bool quiet = false;
};

int resolve_threads(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("FUSIONLAB_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
        throw Failure{kConfig, "FUSIONLAB_THREADS must be a positive integer"};
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

fs::path require_out(const Globals& g) {
    if (g.out.empty()) throw Failure{kConfig, "--out is required"};
    return g.out;
}

class Log {
public:
    explicit Log(bool quiet) : quiet_(quiet) {}
    template <class... T>
    void operator()(const T&... parts) const {
        if (quiet_) return;
        (std::cerr << ... << parts) << '\n';
    }

private:
    bool quiet_;
};

io::RunManifest start_manifest(const std::string& cmd, int argc, char** argv) {
    io::RunManifest m;
    m.command = cmd;
    for (int i = 1; i < argc; ++i) m.arguments.emplace_back(argv[i]);
    m.started = std::chrono::system_clock::now();
    return m;
}

void finish_manifest(io::RunManifest& m, const fs::path& out) {
    m.config_hash = io::config_hash(m.configs);
    m.finished = std::chrono::system_clock::now();
    io::write_manifest(out, m);
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Globals& g, const std::string& config, std::optional<std::size_t> trials,
                 io::RunManifest m) {
    const Log log(g.quiet);
    const fs::path out = require_out(g);
    io::SuiteSpec spec = io::load_suite(config, g.seed);
    if (g.seed) m.overrides.push_back("seed=" + std::to_string(*g.seed));
    if (trials) {
        spec.n_trials = *trials;
        m.overrides.push_back("trials=" + std::to_string(*trials));
    }
    if (spec.n_trials == 0) throw Failure{kConfig, "trials must be >= 1"};
    m.configs = {config};
    fs::create_directories(out);
    io::StoreIndex idx{spec.name, spec.base_seed, spec.n_trials, {}};
    for (const auto& c : spec.cells) idx.scenarios.push_back(c.name);
    const int threads = resolve_threads(g.threads);
    for (std::size_t t = 0; t < spec.n_trials; ++t) {
        const std::uint64_t seed = eval::trial_seed(spec.base_seed, t);
        m.seeds.push_back(seed);
        parallel_for(spec.cells.size(), threads, [&](std::size_t i) {
            const auto d = sim::simulate(spec.cells[i], eval::cell_noise_seed(seed, i));
            io::store_dataset(out, d, {t, eval::cell_noise_seed(seed, i), spec.train_fraction});
        });
        log("simulated trial ", t + 1, "/", spec.n_trials);
    }
    io::write_text(out / "index.yaml", io::emit_index(idx));
    finish_manifest(m, out);
    log("wrote ", spec.cells.size(), " scenarios x ", spec.n_trials, " trials to ", out.string());
    return kOk;
}

// -------------------------------------------------------------------- tune

std::vector<sim::SensorDataset> unwrap(std::vector<io::LoadedDataset>&& loaded) {
    std::vector<sim::SensorDataset> out;
    for (auto& l : loaded) out.push_back(std::move(l.data));
    return out;
}

double train_fraction_of(const std::vector<io::LoadedDataset>& loaded) {
    std::optional<double> f;
    for (const auto& l : loaded) {
        if (!l.meta.train_fraction)
            throw Failure{kConfig, "missing train split for dataset " + l.data.config.name};
        if (f && *f != *l.meta.train_fraction) throw Failure{kConfig, "inconsistent train split across datasets"};
        f = l.meta.train_fraction;
    }
    return *f;
}

int cmd_tune(const Globals& g, const std::string& dataset_dir, const std::string& tuning_config,
             io::RunManifest m) {
    const Log log(g.quiet);
    const fs::path out = require_out(g);
    tuning::TuningConfig cfg = io::load_tuning(tuning_config);
    if (g.seed) {
        cfg.swarm.seed = *g.seed;
        m.overrides.push_back("seed=" + std::to_string(*g.seed));
    }
    m.configs = {tuning_config};
    const auto idx = io::load_index(dataset_dir);
    const int threads = resolve_threads(g.threads);
    io::TunedParams tuned;
    tuned.scope = cfg.scope;
    std::vector<std::vector<double>> histories;
    double tuned_acc = 0.0, manual_acc = 0.0;
    for (std::size_t t = 0; t < idx.n_trials; ++t) {
        auto loaded = io::load_trial(dataset_dir, idx, t);
        const double fraction = train_fraction_of(loaded);
        const auto sets = unwrap(std::move(loaded));
        tuning::TuningConfig c = cfg;
        c.train_fraction = fraction;
        c.swarm.seed = derive_seed(cfg.swarm.seed, t);
        m.seeds.push_back(c.swarm.seed);
        const auto result = eval::tune_trial(sets, c, threads);
        io::TunedParams::Trial tr;
        tr.trial = t;
        tr.seed = c.swarm.seed;
        tr.history = result.history();
        tr.evaluations = result.evaluations();
        for (std::size_t i = 0; i < result.results.size(); ++i)
            tr.cells.push_back({cfg.scope == tuning::FitnessScope::Aggregate ? "*" : idx.scenarios[i],
                                result.results[i].best_params, result.results[i].best_fitness});
        histories.push_back(tr.history);
        const auto train = eval::train_prefixes(sets, fraction);
        double best = 0.0, manual = 0.0;
        for (std::size_t i = 0; i < train.size(); ++i) {
            best += tuning::fitness(result.params_for(i), train[i], cfg.target);
            manual += tuning::fitness(filter::FilterParams::manual_default(), train[i], cfg.target);
        }
        tuned_acc += best / static_cast<double>(train.size());
        manual_acc += manual / static_cast<double>(train.size());
        log("trial ", t + 1, "/", idx.n_trials, ": train RMSE tuned ", best / train.size(), " m, manual ",
            manual / train.size(), " m");
        tuned.trials.push_back(std::move(tr));
    }
    fs::create_directories(out);
    io::write_text(out / "params.yaml", io::emit_tuned(tuned));
    eval::write_file(out / "convergence.csv", [&](std::ostream& o) { eval::write_convergence_csv(o, histories.front()); });
    eval::write_file(out / "convergence_trials.csv",
                     [&](std::ostream& o) { eval::write_convergence_trials_csv(o, histories); });
    finish_manifest(m, out);
    const double n = static_cast<double>(idx.n_trials);
    if (!g.quiet)
        std::cout << "best train RMSE " << io::format_sig6(tuned_acc / n) << " m vs manual-default "
                  << io::format_sig6(manual_acc / n) << " m\n";
    return kOk;
}

// ---------------------------------------------------------------- evaluate

std::vector<eval::Method> parse_methods(const std::string& list) {
    std::vector<eval::Method> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(eval::parse_method(item));
    if (out.empty()) throw Failure{kConfig, "--methods is empty"};
    return out;
}

io::TunedParams load_params_arg(const std::string& arg, io::RunManifest& m) {
    if (arg.empty() || arg == "default") {
        io::TunedParams t;
        t.fixed = filter::FilterParams::manual_default();
        return t;
    }
    m.configs.emplace_back(arg);
    return io::load_tuned(arg);
}

int cmd_evaluate(const Globals& g, const std::string& dataset_dir, const std::string& params_arg,
                 const std::string& eval_config, const std::string& methods_arg, io::RunManifest m) {
    const Log log(g.quiet);
    const fs::path out = require_out(g);
    io::EvaluationSpec spec;
    if (!eval_config.empty()) {
        spec = io::load_evaluation(eval_config);
        m.configs.emplace_back(eval_config);
    }
    if (!methods_arg.empty()) spec.methods = parse_methods(methods_arg);
    const io::TunedParams tuned = load_params_arg(params_arg, m);
    const auto idx = io::load_index(dataset_dir);
    if (idx.n_trials < 2) throw Failure{kConfig, "evaluation needs at least 2 trials (CI undefined for n=1)"};

    eval::SuiteReport report;
    report.cell_names = idx.scenarios;
    report.methods = spec.methods;
    std::optional<sim::SensorDataset> overlay_data;
    std::size_t overlay_cell = 0;
    if (!spec.overlay_scenario.empty()) {
        auto it = std::find(idx.scenarios.begin(), idx.scenarios.end(), spec.overlay_scenario);
        if (it == idx.scenarios.end()) throw Failure{kConfig, "overlay scenario not found: " + spec.overlay_scenario};
        overlay_cell = static_cast<std::size_t>(it - idx.scenarios.begin());
    }
    if (spec.overlay_trial >= idx.n_trials) throw Failure{kConfig, "overlay trial out of range"};
    std::optional<double> fraction;
    for (std::size_t t = 0; t < idx.n_trials; ++t) {
        auto loaded = io::load_trial(dataset_dir, idx, t);
        const double f = train_fraction_of(loaded);
        if (fraction && *fraction != f) throw Failure{kConfig, "inconsistent train split across trials"};
        fraction = f;
        m.seeds.push_back(loaded.front().meta.noise_seed);
        const auto sets = unwrap(std::move(loaded));
        auto outcome = eval::evaluate_trial(
            sets, spec.methods, spec.baseline,
            [&](std::size_t i) { return tuned.lookup(t, idx.scenarios[i]); }, f, eval::trial_seed(idx.base_seed, t));
        outcome.trial = t;
        report.trials.push_back(std::move(outcome));
        if (t == spec.overlay_trial) overlay_data = sets[overlay_cell];
        log("evaluated trial ", t + 1, "/", idx.n_trials);
    }
    std::vector<eval::MethodSummary> rows;
    for (auto method : spec.methods) {
        try {
            rows.push_back(report.summary(method));
        } catch (const eval::InsufficientTrials& e) {
            throw Failure{kNumerical, e.what()};
        }
    }
    eval::MethodParams overlay_params = spec.baseline;
    overlay_params.pso = tuned.lookup(spec.overlay_trial, idx.scenarios[overlay_cell]);
    const auto overlay = eval::make_overlay(*overlay_data, spec.methods, overlay_params);
    std::vector<std::vector<double>> histories;
    for (const auto& tr : tuned.trials)
        if (!tr.history.empty()) histories.push_back(tr.history);
    eval::emit_plot_data(report, overlay, histories, out);
    finish_manifest(m, out);
    if (!g.quiet) std::cout << eval::format_table(rows);
    return kOk;
}

// ------------------------------------------------------------------- bench

int cmd_bench(const Globals& g, const std::string& dataset_dir, const std::string& params_arg,
              const std::string& scenario, int repetitions, io::RunManifest m) {
    if (repetitions < 3) throw Failure{kConfig, "--repetitions must be >= 3"};
    const auto idx = io::load_index(dataset_dir);
    const std::string cell = scenario.empty() ? idx.scenarios.front() : scenario;
    if (std::find(idx.scenarios.begin(), idx.scenarios.end(), cell) == idx.scenarios.end())
        throw Failure{kConfig, "scenario not found: " + cell};
    const io::TunedParams tuned = load_params_arg(params_arg, m);
    const auto loaded = io::load_dataset(dataset_dir, cell, 0);
    eval::MethodParams p;
    p.pso = tuned.lookup(0, cell);
    bool all_pass = true;
    std::ostringstream csv;
    csv << "method,ms_per_update,pass\n";
    std::cout << "scenario " << cell << ", " << loaded.data.imu.size() - 1 << " cycles, " << repetitions
              << " repetitions\n";
    for (auto method : eval::kAllMethods) {
        const auto r = eval::benchmark_runtime(method, loaded.data, p, repetitions);
        all_pass &= r.passes();
        char line[128];
        std::snprintf(line, sizeof(line), "%-14s %10.5f ms/update  %s\n",
                      std::string(eval::display_name(method)).c_str(), r.ms_per_update,
                      r.passes() ? "PASS" : "FAIL");
        std::cout << line;
        csv << eval::display_name(method) << ',' << io::format_sig6(r.ms_per_update) << ','
            << (r.passes() ? 1 : 0) << '\n';
    }
    std::cout << "overall (< " << eval::kRealTimeBudgetMs << " ms): " << (all_pass ? "PASS" : "FAIL") << '\n';
    if (!g.out.empty()) {
        fs::create_directories(g.out);
        io::write_text(fs::path(g.out) / "bench.csv", csv.str());
        finish_manifest(m, g.out);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IMU/GPS fusion lab: UKF with PSO-tuned hyperparameters"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "override the config seed");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--threads", g.threads, "worker threads (default: FUSIONLAB_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    app.add_flag("--quiet", g.quiet, "suppress progress output");

    std::string sim_config;
    std::optional<std::size_t> sim_trials;
    auto* sim = app.add_subcommand("simulate", "generate truth/imu/gps datasets from a suite config");
    sim->add_option("config", sim_config, "scenario suite config")->required();
    sim->add_option("--trials", sim_trials, "override the number of noise trials");

    std::string tune_data, tune_config;
    auto* tune = app.add_subcommand("tune", "PSO-tune the UKF on the training split");
    tune->add_option("datasets", tune_data, "dataset directory from simulate")->required();
    tune->add_option("config", tune_config, "tuning config")->required();

    std::string ev_data, ev_params, ev_config, ev_methods;
    auto* ev = app.add_subcommand("evaluate", "score every method on the test split");
    ev->add_option("datasets", ev_data, "dataset directory from simulate")->required();
    ev->add_option("params", ev_params, "params.yaml from tune, or 'default'");
    ev->add_option("--config", ev_config, "evaluation config");
    ev->add_option("--methods", ev_methods, "comma-separated subset, e.g. ekf,manual_ukf");

    std::string bench_data, bench_params, bench_scenario;
    int bench_reps = 5;
    auto* bench = app.add_subcommand("bench", "time predict/update cycles per method");
    bench->add_option("datasets", bench_data, "dataset directory from simulate")->required();
    bench->add_option("params", bench_params, "params.yaml from tune, or 'default'");
    bench->add_option("--scenario", bench_scenario, "scenario to time (default: first)");
    bench->add_option("--repetitions", bench_reps, "timed passes (>= 3)");

    // Global flags may also follow the subcommand.
    for (auto* sub : {sim, tune, ev, bench}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*sim) return cmd_simulate(g, sim_config, sim_trials, start_manifest("simulate", argc, argv));
        if (*tune) return cmd_tune(g, tune_data, tune_config, start_manifest("tune", argc, argv));
        if (*ev)
            return cmd_evaluate(g, ev_data, ev_params, ev_config, ev_methods,
                                start_manifest("evaluate", argc, argv));
        if (*bench)
            return cmd_bench(g, bench_data, bench_params, bench_scenario, bench_reps,
                             start_manifest("bench", argc, argv));
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << '\n';
        return f.code;
    } catch (const io::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const tuning::NoFeasibleParticle& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const filter::DivergenceError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const eval::InsufficientTrials& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const io::CsvError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const eval::ReportError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kOk;
}

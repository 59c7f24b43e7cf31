#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fusionlab/eval/methods.hpp"
#include "fusionlab/eval/metrics.hpp"
#include "fusionlab/eval/stats.hpp"
#include "fusionlab/parallel.hpp"
#include "fusionlab/random.hpp"
#include "fusionlab/sim/dataset.hpp"
#include "fusionlab/tuning/ukf_tuner.hpp"

namespace fusionlab::eval {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Metrics of one method on one cell, scored on the test suffix.
struct CellScore {
    double rmse_m = kNaN;
    double orientation_err_deg = kNaN;
    double outage_drift_m = kNaN;  // NaN when no outage falls in the scored span
    double runtime_per_update_ms = kNaN;
    bool diverged = false;
};

/// Per-method result of one trial, averaged over the suite's cells.
struct TrialResult {
    Method method = Method::ManualUKF;
    double rmse_m = kNaN;
    double orientation_err_deg = kNaN;
    double outage_drift_m = kNaN;
    double runtime_per_update_ms = kNaN;
    std::uint64_t seed = 0;
    bool diverged = false;
};

/// Index of the first sample at or after the train/test cut.
inline std::size_t test_start_index(const sim::SensorDataset& d, double train_fraction) {
    const auto [train, test] = sim::partition(d, train_fraction);
    return train.imu.size();
}

/// Scores estimates[from..] against the matching truth. Outage windows are
/// clipped to the scored span.
inline CellScore score_run(const filter::FilterRun& run, const sim::SensorDataset& d, std::size_t from) {
    if (run.estimates.size() != d.truth.size())
        throw std::invalid_argument("score_run: run and truth lengths differ");
    if (from >= d.truth.size()) throw std::invalid_argument("score_run: empty scoring span");
    const std::span<const filter::StateEstimate> est = std::span(run.estimates).subspan(from);
    const std::span<const sim::GroundTruthState> truth = std::span(d.truth).subspan(from);
    CellScore s;
    s.rmse_m = rmse(est, truth);
    s.orientation_err_deg = orientation_error(est, truth);
    std::vector<sim::OutageWindow> windows;
    const double t0 = truth.front().t;
    const double t1 = truth.back().t;
    for (const auto& w : d.config.outage_windows) {
        const sim::OutageWindow c{std::max(w.start_s, t0), std::min(w.end_s, t1)};
        if (c.end_s > c.start_s) windows.push_back(c);
    }
    if (!windows.empty()) s.outage_drift_m = outage_drift(est, truth, windows);
    if (!std::isfinite(s.rmse_m) || !std::isfinite(s.orientation_err_deg)) s.diverged = true;
    return s;
}

/// Runs one method over the full stream, timing it, and scores the suffix.
inline CellScore evaluate_cell(Method m, const sim::SensorDataset& d, const MethodParams& p,
                               std::size_t from) {
    try {
        const auto t0 = std::chrono::steady_clock::now();
        const auto run = run_method(m, d, p);
        const auto t1 = std::chrono::steady_clock::now();
        CellScore s = score_run(run, d, from);
        const double cycles = static_cast<double>(std::max<std::size_t>(d.imu.size() - 1, 1));
        s.runtime_per_update_ms = std::chrono::duration<double, std::milli>(t1 - t0).count() / cycles;
        return s;
    } catch (const filter::DivergenceError&) {
        CellScore s;
        s.diverged = true;
        return s;
    }
}

/// Mean over cells; a single divergent cell marks the trial divergent.
inline TrialResult fold_cells(Method m, std::span<const CellScore> cells, std::uint64_t seed) {
    TrialResult r;
    r.method = m;
    r.seed = seed;
    double rmse_acc = 0.0, orient_acc = 0.0, drift_acc = 0.0, rt_acc = 0.0;
    std::size_t drift_n = 0;
    for (const auto& c : cells) {
        if (c.diverged) {
            r.diverged = true;
            return r;
        }
        rmse_acc += c.rmse_m;
        orient_acc += c.orientation_err_deg;
        rt_acc += c.runtime_per_update_ms;
        if (!std::isnan(c.outage_drift_m)) {
            drift_acc += c.outage_drift_m;
            ++drift_n;
        }
    }
    const double n = static_cast<double>(cells.size());
    r.rmse_m = rmse_acc / n;
    r.orientation_err_deg = orient_acc / n;
    r.runtime_per_update_ms = rt_acc / n;
    if (drift_n > 0) r.outage_drift_m = drift_acc / static_cast<double>(drift_n);
    return r;
}

struct SuiteConfig {
    std::string name = "suite";
    std::vector<sim::ScenarioConfig> cells;
    std::size_t n_trials = 20;
    std::uint64_t base_seed = 0;
    double train_fraction = 0.7;
    std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
    tuning::TuningConfig tuning;
    MethodParams baseline;  // manual reference parameters
    int threads = 1;

    void validate() const {
        if (cells.empty()) throw std::invalid_argument("suite: no scenario cells");
        if (n_trials < 2) throw std::invalid_argument("suite: n_trials must be >= 2 (CI undefined)");
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw std::invalid_argument("suite: train_fraction must lie in (0, 1)");
        if (methods.empty()) throw std::invalid_argument("suite: no methods selected");
        for (const auto& c : cells) c.validate();
    }
};

/// Noise seed of a trial; cells draw their own stream from it.
inline std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial) {
    return derive_seed(base_seed, 0x747269616cULL + trial);
}

inline std::uint64_t cell_noise_seed(std::uint64_t trial_seed, std::size_t cell) {
    return derive_seed(trial_seed, cell);
}

inline std::vector<sim::SensorDataset> simulate_trial(std::span<const sim::ScenarioConfig> cells,
                                                      std::uint64_t seed) {
    std::vector<sim::SensorDataset> out;
    out.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) out.push_back(sim::simulate(cells[i], cell_noise_seed(seed, i)));
    return out;
}

inline std::vector<sim::SensorDataset> train_prefixes(std::span<const sim::SensorDataset> sets,
                                                      double train_fraction) {
    std::vector<sim::SensorDataset> out;
    out.reserve(sets.size());
    for (const auto& d : sets) out.push_back(sim::partition(d, train_fraction).first);
    return out;
}

/// PSO over the training prefixes of one trial's datasets.
inline tuning::SuiteTuning tune_trial(std::span<const sim::SensorDataset> sets,
                                      const tuning::TuningConfig& cfg, int threads) {
    const auto train = train_prefixes(sets, cfg.train_fraction);
    tuning::TuningConfig c = cfg;
    if (cfg.scope == tuning::FitnessScope::Aggregate) {
        c.swarm.threads = threads;
        return tuning::tune_suite(train, c);
    }
    return tuning::tune_suite(train, c, [threads](std::size_t n, const auto& fn) {
        parallel_for(n, threads, fn);
    });
}

struct TrialOutcome {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::optional<tuning::SuiteTuning> tuning;
    std::map<Method, std::vector<CellScore>> cells;
    std::map<Method, TrialResult> results;
};

/// Scores every method on every dataset. `pso_params(i)` yields the tuned
/// parameters of cell i.
template <class PsoParamsFn>
TrialOutcome evaluate_trial(std::span<const sim::SensorDataset> sets, std::span<const Method> methods,
                            const MethodParams& baseline, PsoParamsFn&& pso_params,
                            double train_fraction, std::uint64_t seed) {
    TrialOutcome out;
    out.seed = seed;
    for (Method m : methods) {
        std::vector<CellScore> cells;
        cells.reserve(sets.size());
        for (std::size_t i = 0; i < sets.size(); ++i) {
            MethodParams p = baseline;
            if (m == Method::PsoUKF) p.pso = pso_params(i);
            cells.push_back(evaluate_cell(m, sets[i], p, test_start_index(sets[i], train_fraction)));
        }
        out.results[m] = fold_cells(m, cells, seed);
        out.cells[m] = std::move(cells);
    }
    return out;
}

/// simulate -> tune on the prefixes -> score every method on the suffixes.
inline TrialOutcome run_trial(const SuiteConfig& suite, std::size_t trial) {
    const std::uint64_t seed = trial_seed(suite.base_seed, trial);
    const auto sets = simulate_trial(suite.cells, seed);
    std::optional<tuning::SuiteTuning> tuned;
    bool needs_pso = false;
    for (Method m : suite.methods) needs_pso |= m == Method::PsoUKF;
    if (needs_pso) {
        tuning::TuningConfig cfg = suite.tuning;
        cfg.train_fraction = suite.train_fraction;
        cfg.swarm.seed = derive_seed(suite.tuning.swarm.seed, trial);
        tuned = tune_trial(sets, cfg, suite.threads);
    }
    auto out = evaluate_trial(
        sets, suite.methods, suite.baseline,
        [&](std::size_t i) { return tuned->params_for(i); }, suite.train_fraction, seed);
    out.trial = trial;
    out.tuning = std::move(tuned);
    return out;
}

/// Statistics of one metric across trials, divergent trials excluded.
struct MethodSummary {
    Method method = Method::ManualUKF;
    AggregateStats rmse;
    double orientation_err_deg = kNaN;
    double outage_drift_m = kNaN;
    double runtime_per_update_ms = kNaN;
    std::size_t diverged_trials = 0;
};

/// Raised when a method has fewer than two non-divergent trials.
class InsufficientTrials : public std::runtime_error {
public:
    explicit InsufficientTrials(Method m)
        : std::runtime_error("method " + std::string(display_name(m)) +
                             " has fewer than 2 successful trials"),
          method(m) {}
    Method method;
};

inline MethodSummary summarize(Method m, std::span<const TrialResult> trials) {
    MethodSummary s;
    s.method = m;
    std::vector<double> rmse;
    double orient = 0.0, runtime = 0.0, drift = 0.0;
    std::size_t drift_n = 0;
    for (const auto& t : trials) {
        if (t.diverged) {
            ++s.diverged_trials;
            continue;
        }
        rmse.push_back(t.rmse_m);
        orient += t.orientation_err_deg;
        runtime += t.runtime_per_update_ms;
        if (!std::isnan(t.outage_drift_m)) {
            drift += t.outage_drift_m;
            ++drift_n;
        }
    }
    if (rmse.size() < 2) throw InsufficientTrials(m);
    const double n = static_cast<double>(rmse.size());
    s.rmse = aggregate(rmse);
    s.orientation_err_deg = orient / n;
    s.runtime_per_update_ms = runtime / n;
    if (drift_n > 0) s.outage_drift_m = drift / static_cast<double>(drift_n);
    return s;
}

inline std::vector<TrialResult> collect(std::span<const TrialOutcome> outcomes, Method m) {
    std::vector<TrialResult> out;
    for (const auto& o : outcomes) out.push_back(o.results.at(m));
    return out;
}

/// Per-cell results of one method as pseudo-trials, for per-scenario rows.
inline std::vector<TrialResult> collect_cell(std::span<const TrialOutcome> outcomes, Method m,
                                             std::size_t cell) {
    std::vector<TrialResult> out;
    for (const auto& o : outcomes) {
        const auto& c = o.cells.at(m)[cell];
        TrialResult r;
        r.method = m;
        r.seed = o.seed;
        r.rmse_m = c.rmse_m;
        r.orientation_err_deg = c.orientation_err_deg;
        r.outage_drift_m = c.outage_drift_m;
        r.runtime_per_update_ms = c.runtime_per_update_ms;
        r.diverged = c.diverged;
        out.push_back(r);
    }
    return out;
}

struct SuiteReport {
    std::vector<std::string> cell_names;
    std::vector<Method> methods;
    std::vector<TrialOutcome> trials;

    MethodSummary summary(Method m) const { return summarize(m, collect(trials, m)); }
};

/// Every method over n_trials noise seeds; trials are independent and are
/// gathered in trial order.
inline SuiteReport multi_trial(const SuiteConfig& suite,
                               const std::function<void(const TrialOutcome&)>& on_trial = {}) {
    suite.validate();
    SuiteReport report;
    for (const auto& c : suite.cells) report.cell_names.push_back(c.name);
    report.methods = suite.methods;
    report.trials.resize(suite.n_trials);
    for (std::size_t t = 0; t < suite.n_trials; ++t) {
        report.trials[t] = run_trial(suite, t);
        if (on_trial) on_trial(report.trials[t]);
    }
    return report;
}

inline SuiteReport multi_trial(SuiteConfig suite, std::size_t n_trials) {
    suite.n_trials = n_trials;
    return multi_trial(suite);
}

}  // namespace fusionlab::eval

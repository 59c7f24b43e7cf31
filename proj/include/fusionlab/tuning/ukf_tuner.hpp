#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fusionlab/eval/metrics.hpp"
#include "fusionlab/filter/ukf.hpp"
#include "fusionlab/sim/dataset.hpp"
#include "fusionlab/tuning/pso.hpp"

namespace fusionlab::tuning {

using filter::FilterParams;

/// Noise entries in the decision vector: one per state/measurement axis
/// (m = 5, n = 2) or a single shared value each (m = n = 1).
enum class NoiseLayout { Diagonal, Isotropic };

inline int q_count(NoiseLayout l) { return l == NoiseLayout::Diagonal ? filter::kStateDim : 1; }
inline int r_count(NoiseLayout l) { return l == NoiseLayout::Diagonal ? filter::kMeasDim : 1; }
inline std::size_t decision_size(NoiseLayout l) {
    return static_cast<std::size_t>(3 + q_count(l) + r_count(l));
}

/// [alpha, beta, kappa, q_1..q_m, r_1..r_n] -> FilterParams.
inline FilterParams decode(std::span<const double> v, NoiseLayout layout = NoiseLayout::Diagonal) {
    if (v.size() != decision_size(layout))
        throw std::invalid_argument("decode: decision vector has length " + std::to_string(v.size()) +
                                    ", expected " + std::to_string(decision_size(layout)));
    FilterParams p;
    p.alpha = v[0];
    p.beta = v[1];
    p.kappa = v[2];
    const int m = q_count(layout);
    for (int i = 0; i < filter::kStateDim; ++i) p.q_diag(i) = v[3 + (m == 1 ? 0 : i)];
    const int n = r_count(layout);
    for (int i = 0; i < filter::kMeasDim; ++i) p.r_diag(i) = v[3 + m + (n == 1 ? 0 : i)];
    return p;
}

/// Inverse of decode. The isotropic layout requires equal noise entries.
inline std::vector<double> encode(const FilterParams& p, NoiseLayout layout = NoiseLayout::Diagonal) {
    std::vector<double> v{p.alpha, p.beta, p.kappa};
    if (layout == NoiseLayout::Diagonal) {
        for (int i = 0; i < filter::kStateDim; ++i) v.push_back(p.q_diag(i));
        for (int i = 0; i < filter::kMeasDim; ++i) v.push_back(p.r_diag(i));
    } else {
        if ((p.q_diag.array() != p.q_diag(0)).any() || (p.r_diag.array() != p.r_diag(0)).any())
            throw std::invalid_argument("encode: params are not isotropic");
        v.push_back(p.q_diag(0));
        v.push_back(p.r_diag(0));
    }
    return v;
}

/// alpha in [1e-3, 1], beta in [0, 3], kappa in [0, 5], q, r in [1e-5, 10];
/// noise dimensions are seeded log-uniformly.
inline ParameterBounds default_bounds(NoiseLayout layout = NoiseLayout::Diagonal) {
    ParameterBounds b;
    b.lower = {1e-3, 0.0, 0.0};
    b.upper = {1.0, 3.0, 5.0};
    b.log_init = {false, false, false};
    const int noise = q_count(layout) + r_count(layout);
    for (int i = 0; i < noise; ++i) {
        b.lower.push_back(1e-5);
        b.upper.push_back(10.0);
        b.log_init.push_back(true);
    }
    return b;
}

/// Reference the fitness compares the estimated track against.
enum class FitnessTarget { Truth, Gps };

inline double gps_rmse(const filter::FilterRun& run, const sim::SensorDataset& d) {
    std::vector<eval::PositionError> errs;
    std::size_t k = 0;
    for (const auto& f : d.gps) {
        if (!f.valid) continue;
        while (k < run.estimates.size() && run.estimates[k].t < f.t - filter::kTimestampTolerance) ++k;
        if (k == run.estimates.size()) break;
        const auto& e = run.estimates[k];
        errs.push_back({e.mean(filter::kX) - f.x, e.mean(filter::kY) - f.y});
    }
    return eval::rmse(errs);
}

/// Position RMSE of a UKF run over the whole dataset; a divergent run scores
/// +inf.
inline double fitness(const FilterParams& params, const sim::SensorDataset& d,
                      FitnessTarget target = FitnessTarget::Truth) {
    try {
        const auto run = filter::run_filter(params, d);
        const double r = target == FitnessTarget::Truth ? eval::rmse(run.estimates, d.truth)
                                                        : gps_rmse(run, d);
        return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
    } catch (const filter::DivergenceError&) {
        return std::numeric_limits<double>::infinity();
    }
}

/// Mean of the per-dataset fitness; +inf if any dataset diverges.
inline double aggregate_fitness(const FilterParams& params, std::span<const sim::SensorDataset> sets,
                                FitnessTarget target = FitnessTarget::Truth) {
    if (sets.empty()) throw std::invalid_argument("aggregate_fitness: no datasets");
    double acc = 0.0;
    for (const auto& d : sets) {
        const double f = fitness(params, d, target);
        if (!std::isfinite(f)) return std::numeric_limits<double>::infinity();
        acc += f;
    }
    return acc / static_cast<double>(sets.size());
}

/// Aggregate: one parameter set minimizing the mean RMSE over all cells.
/// PerCell: an independent swarm for every cell.
enum class FitnessScope { Aggregate, PerCell };

struct TuningConfig {
    ParameterBounds bounds = default_bounds();
    SwarmConfig swarm;
    NoiseLayout layout = NoiseLayout::Diagonal;
    FitnessTarget target = FitnessTarget::Truth;
    FitnessScope scope = FitnessScope::Aggregate;
    double train_fraction = 0.7;
};

struct TuningResult {
    FilterParams best_params;
    std::vector<double> best_position;
    double best_fitness = std::numeric_limits<double>::infinity();
    double initial_best_fitness = std::numeric_limits<double>::infinity();
    std::vector<double> history;
    std::size_t evaluations = 0;
};

/// PSO over the UKF decision vector, minimizing mean RMSE on the training
/// datasets.
inline TuningResult optimize(std::span<const sim::SensorDataset> train, const TuningConfig& cfg) {
    if (train.empty()) throw std::invalid_argument("optimize: no training datasets");
    if (cfg.bounds.size() != decision_size(cfg.layout))
        throw std::invalid_argument("optimize: bounds length does not match the decision layout");
    const FitnessFn fn = [&](std::span<const double> v) {
        const FilterParams p = decode(v, cfg.layout);
        if (!(filter::kStateDim + p.lambda() > 0.0)) return std::numeric_limits<double>::infinity();
        return aggregate_fitness(p, train, cfg.target);
    };
    const OptimizeResult r = optimize(fn, cfg.bounds, cfg.swarm);
    TuningResult out;
    out.best_params = decode(r.best_position, cfg.layout);
    out.best_position = r.best_position;
    out.best_fitness = r.best_fitness;
    out.initial_best_fitness = r.initial_best_fitness;
    out.history = r.history;
    out.evaluations = r.evaluations;
    return out;
}

inline TuningResult optimize(const sim::SensorDataset& train, const TuningConfig& cfg) {
    return optimize(std::span<const sim::SensorDataset>(&train, 1), cfg);
}

/// Tuning outcome over a set of cells. Aggregate scope holds one result
/// shared by every cell; PerCell holds one result per cell.
struct SuiteTuning {
    FitnessScope scope = FitnessScope::Aggregate;
    std::vector<TuningResult> results;
    std::size_t cell_count = 0;

    const FilterParams& params_for(std::size_t cell) const {
        if (cell >= cell_count) throw std::out_of_range("params_for: cell index out of range");
        return results[scope == FitnessScope::Aggregate ? 0 : cell].best_params;
    }

    /// Per-generation mean over cells of the best fitness.
    std::vector<double> history() const { return mean_of(&TuningResult::history); }

    double initial_best_fitness() const {
        double acc = 0.0;
        for (const auto& r : results) acc += r.initial_best_fitness;
        return acc / static_cast<double>(results.size());
    }

    std::size_t evaluations() const {
        std::size_t n = 0;
        for (const auto& r : results) n += r.evaluations;
        return n;
    }

private:
    std::vector<double> mean_of(std::vector<double> TuningResult::*field) const {
        std::vector<double> out((results.front().*field).size(), 0.0);
        for (const auto& r : results)
            for (std::size_t g = 0; g < out.size(); ++g) out[g] += (r.*field)[g];
        for (double& v : out) v /= static_cast<double>(results.size());
        return out;
    }
};

/// Runs the configured scope. Per-cell swarms get seeds derived from the
/// swarm seed and the cell index; `for_each_index(n, fn)` schedules them.
template <class Scheduler>
SuiteTuning tune_suite(std::span<const sim::SensorDataset> train, const TuningConfig& cfg,
                       Scheduler&& for_each_index) {
    if (train.empty()) throw std::invalid_argument("tune_suite: no training datasets");
    SuiteTuning out;
    out.scope = cfg.scope;
    out.cell_count = train.size();
    if (cfg.scope == FitnessScope::Aggregate) {
        out.results.push_back(optimize(train, cfg));
        return out;
    }
    out.results.resize(train.size());
    std::vector<std::exception_ptr> errors(train.size());
    for_each_index(train.size(), [&](std::size_t i) {
        try {
            TuningConfig c = cfg;
            c.swarm.seed = derive_seed(cfg.swarm.seed, i);
            c.swarm.threads = 1;
            out.results[i] = optimize(train[i], c);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

inline SuiteTuning tune_suite(std::span<const sim::SensorDataset> train, const TuningConfig& cfg) {
    return tune_suite(train, cfg, [](std::size_t n, const auto& fn) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
    });
}

}  // namespace fusionlab::tuning

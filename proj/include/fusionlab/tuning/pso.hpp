#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "fusionlab/random.hpp"

namespace fusionlab::tuning {

/// Box constraints of the search space. Dimensions flagged log_init are
/// seeded log-uniformly (they span several decades).
struct ParameterBounds {
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<bool> log_init;

    std::size_t size() const { return lower.size(); }
    double span(std::size_t i) const { return upper[i] - lower[i]; }

    void validate() const {
        if (lower.empty() || lower.size() != upper.size())
            throw std::invalid_argument("bounds: lower/upper must be non-empty and equal length");
        if (!log_init.empty() && log_init.size() != lower.size())
            throw std::invalid_argument("bounds: log_init length mismatch");
        for (std::size_t i = 0; i < lower.size(); ++i) {
            if (!(lower[i] < upper[i]))
                throw std::invalid_argument("bounds: lower must be < upper in every dimension");
            if (is_log(i) && !(lower[i] > 0.0))
                throw std::invalid_argument("bounds: log-initialized dimension needs lower > 0");
        }
    }

    bool is_log(std::size_t i) const { return !log_init.empty() && log_init[i]; }

    /// The projection onto the box.
    double clamp(std::size_t i, double v) const { return std::clamp(v, lower[i], upper[i]); }
};

struct SwarmConfig {
    int n_particles = 30;
    int n_generations = 50;
    double c1 = 1.5;
    double c2 = 1.5;
    // Inertia falls linearly from inertia_start (first step) to inertia_end (last step).
    double inertia_start = 0.9;
    double inertia_end = 0.4;
    std::uint64_t seed = 0;
    double v_max_fraction = 0.2;
    int threads = 1;

    double inertia(int generation) const {
        if (n_generations <= 1) return inertia_start;
        const double f = static_cast<double>(generation) / (n_generations - 1);
        return inertia_start + (inertia_end - inertia_start) * f;
    }

    void validate() const {
        if (n_particles <= 0 || n_generations <= 0)
            throw std::invalid_argument("swarm: particle and generation counts must be > 0");
        if (c1 < 0.0 || c2 < 0.0) throw std::invalid_argument("swarm: c1, c2 must be >= 0");
        for (double w : {inertia_start, inertia_end})
            if (!(w > 0.0 && w < 1.5)) throw std::invalid_argument("swarm: inertia must lie in (0, 1.5)");
        if (!(v_max_fraction > 0.0)) throw std::invalid_argument("swarm: v_max_fraction must be > 0");
        if (threads <= 0) throw std::invalid_argument("swarm: threads must be > 0");
    }
};

struct Particle {
    std::vector<double> position;
    std::vector<double> velocity;
    std::vector<double> best_position;
    double fitness = std::numeric_limits<double>::infinity();
    double best_fitness = std::numeric_limits<double>::infinity();
};

struct Swarm {
    ParameterBounds bounds;
    std::vector<Particle> particles;
    std::vector<double> best_position;
    double best_fitness = std::numeric_limits<double>::infinity();
};

/// Minimized objective. Non-finite values are read as +inf (infeasible).
using FitnessFn = std::function<double(std::span<const double>)>;

/// Raised when every evaluation of a run was infeasible.
class NoFeasibleParticle : public std::runtime_error {
public:
    NoFeasibleParticle() : std::runtime_error("no feasible particle: every fitness evaluation diverged") {}
};

namespace detail {

inline double sanitize(double f) {
    return std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
}

/// Fitness of every particle's current position. Work is split across
/// threads but results land by index, so the outcome is schedule-independent.
inline void evaluate(std::vector<Particle>& particles, const FitnessFn& fitness, int threads) {
    const std::size_t n = particles.size();
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < n; i += stride)
            particles[i].fitness = sanitize(fitness(particles[i].position));
    };
    const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    if (t <= 1) {
        work(0, 1);
        return;
    }
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(t);
    for (std::size_t k = 0; k < t; ++k)
        pool.emplace_back([&, k] {
            try {
                work(k, t);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
    pool.clear();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Sequential fold over particle indices; only strict improvements count.
inline void fold_bests(Swarm& swarm) {
    for (auto& p : swarm.particles) {
        if (p.fitness < p.best_fitness) {
            p.best_fitness = p.fitness;
            p.best_position = p.position;
        }
        if (p.best_fitness < swarm.best_fitness) {
            swarm.best_fitness = p.best_fitness;
            swarm.best_position = p.best_position;
        }
    }
}

}  // namespace detail

/// Random positions inside the bounds (log-uniform where flagged), zero
/// velocities, evaluated once.
inline Swarm init_swarm(const ParameterBounds& bounds, const FitnessFn& fitness,
                        const SwarmConfig& config, Engine& rng) {
    bounds.validate();
    config.validate();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Swarm swarm;
    swarm.bounds = bounds;
    swarm.particles.resize(static_cast<std::size_t>(config.n_particles));
    for (auto& p : swarm.particles) {
        p.position.resize(bounds.size());
        for (std::size_t i = 0; i < bounds.size(); ++i) {
            const double u = unit(rng);
            if (bounds.is_log(i)) {
                const double lo = std::log(bounds.lower[i]);
                const double hi = std::log(bounds.upper[i]);
                p.position[i] = bounds.clamp(i, std::exp(lo + u * (hi - lo)));
            } else {
                p.position[i] = bounds.lower[i] + u * bounds.span(i);
            }
        }
        p.velocity.assign(bounds.size(), 0.0);
        p.best_position = p.position;
    }
    detail::evaluate(swarm.particles, fitness, config.threads);
    swarm.best_position = swarm.particles.front().position;
    detail::fold_bests(swarm);
    return swarm;
}

/// One synchronous generation:
///   v <- w v + c1 r1 (pbest - p) + c2 r2 (gbest - p),  |v_i| <= v_max_i
///   p <- clamp(p + v)
/// with r1, r2 drawn per dimension. All random draws happen before the
/// (possibly parallel) fitness evaluation.
inline void pso_step(Swarm& swarm, const FitnessFn& fitness, int generation,
                     const SwarmConfig& config, Engine& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto& b = swarm.bounds;
    const double w = config.inertia(generation);
    for (auto& p : swarm.particles) {
        for (std::size_t i = 0; i < b.size(); ++i) {
            const double r1 = unit(rng);
            const double r2 = unit(rng);
            const double v_max = config.v_max_fraction * b.span(i);
            double v = w * p.velocity[i] + config.c1 * r1 * (p.best_position[i] - p.position[i]) +
                       config.c2 * r2 * (swarm.best_position[i] - p.position[i]);
            v = std::clamp(v, -v_max, v_max);
            p.velocity[i] = v;
            p.position[i] = b.clamp(i, p.position[i] + v);
        }
    }
    detail::evaluate(swarm.particles, fitness, config.threads);
    detail::fold_bests(swarm);
}

struct OptimizeResult {
    std::vector<double> best_position;
    double best_fitness = std::numeric_limits<double>::infinity();
    double initial_best_fitness = std::numeric_limits<double>::infinity();
    std::vector<double> history;  // global best after each generation
    std::size_t evaluations = 0;
};

/// Seeded PSO run. Throws NoFeasibleParticle when no evaluation was finite.
inline OptimizeResult optimize(const FitnessFn& fitness, const ParameterBounds& bounds,
                               const SwarmConfig& config) {
    auto rng = make_engine(derive_seed(config.seed, 0x70736fULL));
    Swarm swarm = init_swarm(bounds, fitness, config, rng);
    OptimizeResult out;
    out.initial_best_fitness = swarm.best_fitness;
    out.evaluations = swarm.particles.size();
    out.history.reserve(static_cast<std::size_t>(config.n_generations));
    for (int g = 0; g < config.n_generations; ++g) {
        pso_step(swarm, fitness, g, config, rng);
        out.evaluations += swarm.particles.size();
        out.history.push_back(swarm.best_fitness);
    }
    if (!std::isfinite(swarm.best_fitness)) throw NoFeasibleParticle();
    out.best_position = swarm.best_position;
    out.best_fitness = swarm.best_fitness;
    return out;
}

}  // namespace fusionlab::tuning

#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace fusionlab::eval {

inline constexpr double kZ95 = 1.96;

struct AggregateStats {
    double mean = 0.0;
    double std_dev = 0.0;  // sample (n - 1) denominator
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    std::size_t n_trials = 0;

    double half_width() const { return ci95_high - mean; }
};

/// Normal-approximation interval mean +- 1.96 s / sqrt(n).
inline AggregateStats stats_from_moments(double mean, double std_dev, std::size_t n) {
    if (n < 2) throw std::invalid_argument("stats: need at least 2 trials");
    if (!(std_dev >= 0.0)) throw std::invalid_argument("stats: std_dev must be >= 0");
    const double h = kZ95 * std_dev / std::sqrt(static_cast<double>(n));
    return {mean, std_dev, mean - h, mean + h, n};
}

inline AggregateStats aggregate(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("stats: need at least 2 trials");
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    return stats_from_moments(mean, std::sqrt(ss / static_cast<double>(n - 1)), n);
}

/// First generation (1-based) whose relative improvement over the previous
/// best drops below `tolerance`. `initial` is the best fitness before the
/// first generation.
inline std::optional<std::size_t> convergence_generation(double initial, std::span<const double> history,
                                                         double tolerance = 0.01) {
    double prev = initial;
    for (std::size_t g = 0; g < history.size(); ++g) {
        const double cur = history[g];
        const double rel = std::isfinite(prev) ? (prev - cur) / prev : 1.0;
        if (rel < tolerance) return g + 1;
        prev = cur;
    }
    return std::nullopt;
}

inline bool non_increasing(std::span<const double> history) {
    for (std::size_t g = 1; g < history.size(); ++g)
        if (history[g] > history[g - 1]) return false;
    return true;
}

}  // namespace fusionlab::eval

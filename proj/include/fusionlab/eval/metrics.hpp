#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "fusionlab/angles.hpp"
#include "fusionlab/filter/types.hpp"
#include "fusionlab/sim/scenario.hpp"
#include "fusionlab/sim/trajectory.hpp"

namespace fusionlab::eval {

using filter::StateEstimate;
using sim::GroundTruthState;

inline void check_aligned(std::span<const StateEstimate> est, std::span<const GroundTruthState> truth) {
    if (est.size() != truth.size())
        throw std::invalid_argument("metric: estimate and truth lengths differ");
    if (est.empty()) throw std::invalid_argument("metric: empty sequences");
    for (std::size_t i = 0; i < est.size(); ++i)
        if (std::abs(est[i].t - truth[i].t) > 1e-6)
            throw std::invalid_argument("metric: timestamps misaligned at sample " + std::to_string(i));
}

struct PositionError {
    double dx = 0.0, dy = 0.0;
};

/// sqrt(mean ||e_i||^2) over 2D position errors.
inline double rmse(std::span<const PositionError> errors) {
    if (errors.empty()) throw std::invalid_argument("rmse: no samples");
    double acc = 0.0;
    for (const auto& e : errors) acc += e.dx * e.dx + e.dy * e.dy;
    return std::sqrt(acc / static_cast<double>(errors.size()));
}

inline double rmse(std::span<const StateEstimate> est, std::span<const GroundTruthState> truth) {
    check_aligned(est, truth);
    double acc = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        const double dx = est[i].mean(filter::kX) - truth[i].x;
        const double dy = est[i].mean(filter::kY) - truth[i].y;
        acc += dx * dx + dy * dy;
    }
    return std::sqrt(acc / static_cast<double>(est.size()));
}

/// Relative RMSE reduction in percent: 100 (manual - tuned) / manual.
inline double efficiency_improvement(double manual_rmse, double tuned_rmse) {
    if (!(manual_rmse > 0.0)) throw std::invalid_argument("efficiency_improvement: manual RMSE must be > 0");
    return 100.0 * (manual_rmse - tuned_rmse) / manual_rmse;
}

enum class AngleAggregation { MeanAbsolute, Rms };

/// Wrap-aware heading error in degrees.
inline double orientation_error(std::span<const StateEstimate> est,
                                std::span<const GroundTruthState> truth,
                                AngleAggregation agg = AngleAggregation::MeanAbsolute) {
    check_aligned(est, truth);
    double acc = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        const double e = wrap_angle(est[i].mean(filter::kHeading) - truth[i].heading);
        acc += agg == AngleAggregation::Rms ? e * e : std::abs(e);
    }
    acc /= static_cast<double>(est.size());
    return rad_to_deg(agg == AngleAggregation::Rms ? std::sqrt(acc) : acc);
}

inline constexpr double kDriftWindow = 5.0;  // s

/// Position-error growth across each outage, scaled to a 5 s window and
/// averaged over windows; negative means clamp to zero. Windows with no
/// samples inside the sequence are ignored.
inline double outage_drift(std::span<const StateEstimate> est, std::span<const GroundTruthState> truth,
                           std::span<const sim::OutageWindow> windows) {
    if (windows.empty()) throw std::invalid_argument("outage_drift: no outage windows");
    check_aligned(est, truth);
    auto err = [&](std::size_t i) {
        return std::hypot(est[i].mean(filter::kX) - truth[i].x, est[i].mean(filter::kY) - truth[i].y);
    };
    const double tol = 1e-9;
    double acc = 0.0;
    int used = 0;
    for (const auto& w : windows) {
        std::size_t first = est.size(), last = est.size();
        for (std::size_t i = 0; i < est.size(); ++i) {
            if (est[i].t < w.start_s - tol || est[i].t > w.end_s + tol) continue;
            if (first == est.size()) first = i;
            last = i;
        }
        if (first == est.size() || last == first) continue;
        const double span = est[last].t - est[first].t;
        acc += (err(last) - err(first)) * kDriftWindow / span;
        ++used;
    }
    if (used == 0) throw std::invalid_argument("outage_drift: no window overlaps the sequence");
    return std::max(0.0, acc / used);
}

}  // namespace fusionlab::eval

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fusionlab/angles.hpp"
#include "fusionlab/filter/motion_model.hpp"
#include "fusionlab/filter/types.hpp"
#include "fusionlab/sim/dataset.hpp"

namespace fusionlab::filter {

struct FilterRun {
    std::vector<StateEstimate> estimates;  // one per IMU sample
    std::size_t updates = 0;               // GPS corrections applied
};

/// Loose prior at the first valid fix: zero velocity, heading from the first
/// two valid fixes, cov = diag(10, 10, 4, 4, 0.5). Stamped at the first IMU
/// sample.
inline StateEstimate initial_estimate(const sim::SensorDataset& d) {
    if (d.imu.empty()) throw std::invalid_argument("initial_estimate: empty dataset");
    const sim::GpsFix* first = nullptr;
    const sim::GpsFix* second = nullptr;
    for (const auto& f : d.gps) {
        if (!f.valid) continue;
        if (!first) {
            first = &f;
        } else {
            second = &f;
            break;
        }
    }
    if (!first) throw std::invalid_argument("initial_estimate: no valid GPS fix");
    StateEstimate e;
    e.t = d.imu.front().t;
    e.mean << first->x, first->y, 0.0, 0.0, 0.0;
    if (second) e.mean(kHeading) = std::atan2(second->y - first->y, second->x - first->x);
    e.cov = StateVector(10.0, 10.0, 4.0, 4.0, 0.5).asDiagonal();
    return e;
}

/// State built from ground truth; handy for noiseless checks.
inline StateEstimate truth_estimate(const sim::GroundTruthState& s, double variance) {
    StateEstimate e;
    e.t = s.t;
    e.mean << s.x, s.y, s.vx, s.vy, s.heading;
    e.cov = StateMatrix::Identity() * variance;
    return e;
}

inline constexpr double kTimestampTolerance = 1e-6;

/// Multirate driver shared by every filter: one predict per IMU interval
/// (trapezoidal IMU input), one update per valid GPS fix stamped at the
/// current IMU time. Fixes inside outages are skipped.
template <class PredictFn, class UpdateFn>
FilterRun run_multirate(const sim::SensorDataset& d, StateEstimate state, PredictFn&& predict,
                        UpdateFn&& update) {
    if (d.imu.empty()) throw std::invalid_argument("run: empty dataset");
    FilterRun run;
    run.estimates.reserve(d.imu.size());
    std::size_t g = 0;
    for (std::size_t k = 0; k < d.imu.size(); ++k) {
        const double t = d.imu[k].t;
        if (k > 0) {
            const double dt = t - d.imu[k - 1].t;
            state = predict(state, ImuInput::between(d.imu[k - 1], d.imu[k]), dt);
            state.t = t;
        }
        while (g < d.gps.size() && d.gps[g].t < t - kTimestampTolerance) ++g;
        if (g < d.gps.size() && std::abs(d.gps[g].t - t) <= kTimestampTolerance) {
            if (d.gps[g].valid) {
                state = update(state, d.gps[g]);
                state.t = t;
                ++run.updates;
            }
            ++g;
        }
        run.estimates.push_back(state);
    }
    return run;
}

}  // namespace fusionlab::filter

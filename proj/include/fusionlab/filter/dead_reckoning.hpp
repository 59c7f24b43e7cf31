#pragma once

#include "fusionlab/angles.hpp"
#include "fusionlab/filter/motion_model.hpp"
#include "fusionlab/filter/run_loop.hpp"

namespace fusionlab::filter {

/// IMU-only strapdown integration. GPS is ignored; the covariance is carried
/// through unchanged from init.
inline FilterRun run_dead_reckoning(const sim::SensorDataset& d, const StateEstimate& init) {
    sim::SensorDataset imu_only;
    imu_only.imu = d.imu;
    return run_multirate(
        imu_only, init,
        [](const StateEstimate& s, const ImuInput& u, double dt) {
            StateEstimate out = s;
            out.mean = propagate(s.mean, u, dt);
            out.mean(kHeading) = wrap_angle(out.mean(kHeading));
            return out;
        },
        [](const StateEstimate& s, const sim::GpsFix&) { return s; });
}

inline FilterRun run_dead_reckoning(const sim::SensorDataset& d) {
    return run_dead_reckoning(d, initial_estimate(d));
}

}  // namespace fusionlab::filter

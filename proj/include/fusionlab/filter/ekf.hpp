#pragma once

#include <stdexcept>

#include <Eigen/LU>

#include "fusionlab/angles.hpp"
#include "fusionlab/filter/motion_model.hpp"
#include "fusionlab/filter/run_loop.hpp"

namespace fusionlab::filter {

inline StateEstimate ekf_predict(const StateEstimate& state, const ImuInput& u, double dt,
                                 const StateVector& q_diag) {
    const StateMatrix f = propagate_jacobian(state.mean, u, dt);
    StateEstimate out;
    out.t = state.t + dt;
    out.mean = propagate(state.mean, u, dt);
    out.mean(kHeading) = wrap_angle(out.mean(kHeading));
    out.cov = f * state.cov * f.transpose();
    out.cov.diagonal() += q_diag * dt;
    condition_spd(out.cov, out.t);
    if (!out.mean.allFinite()) throw DivergenceError("non-finite state", out.t);
    return out;
}

inline StateEstimate ekf_update(const StateEstimate& state, const sim::GpsFix& fix,
                                const MeasVector& r_diag) {
    if (!fix.valid) throw std::invalid_argument("ekf_update: fix is flagged invalid");
    const auto h = measure_jacobian();
    const MeasMatrix s = h * state.cov * h.transpose() + MeasMatrix(r_diag.asDiagonal());
    Eigen::FullPivLU<MeasMatrix> lu(s);
    if (!lu.isInvertible() || !s.allFinite())
        throw DivergenceError("innovation covariance singular", state.t);
    const Eigen::Matrix<double, kStateDim, kMeasDim> gain = state.cov * h.transpose() * lu.inverse();
    StateEstimate out;
    out.t = state.t;
    out.mean = state.mean + gain * (MeasVector(fix.x, fix.y) - measure(state.mean));
    out.mean(kHeading) = wrap_angle(out.mean(kHeading));
    out.cov = state.cov - gain * s * gain.transpose();
    condition_spd(out.cov, out.t);
    return out;
}

/// First-order linearized filter over the same models as the UKF.
inline FilterRun run_ekf(const sim::SensorDataset& d, const StateVector& q_diag,
                         const MeasVector& r_diag, const StateEstimate& init) {
    return run_multirate(
        d, init,
        [&](const StateEstimate& s, const ImuInput& u, double dt) {
            return ekf_predict(s, u, dt, q_diag);
        },
        [&](const StateEstimate& s, const sim::GpsFix& f) { return ekf_update(s, f, r_diag); });
}

}  // namespace fusionlab::filter

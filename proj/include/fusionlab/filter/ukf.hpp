#pragma once

#include <stdexcept>

#include <Eigen/LU>

#include "fusionlab/angles.hpp"
#include "fusionlab/filter/motion_model.hpp"
#include "fusionlab/filter/run_loop.hpp"
#include "fusionlab/filter/sigma_points.hpp"
#include "fusionlab/filter/types.hpp"

namespace fusionlab::filter {

/// Measurement-space statistics of one unscented update; exposed for the
/// innovation-adaptive variant.
struct InnovationStats {
    MeasVector innovation;
    MeasMatrix predicted_cov;  // P_zz without measurement noise
};

namespace detail {

// Weighted sigma mean computed relative to point 0, so large negative
// center weights (small alpha) do not amplify rounding in absolute coordinates.
template <int Rows>
Eigen::Matrix<double, Rows, 1> weighted_mean(const Eigen::Matrix<double, Rows, kSigmaCount>& pts,
                                             const UnscentedWeights& w) {
    Eigen::Matrix<double, Rows, 1> acc = Eigen::Matrix<double, Rows, 1>::Zero();
    for (int i = 1; i < kSigmaCount; ++i) acc += (pts.col(i) - pts.col(0));
    return pts.col(0) + w.other * acc;
}

// `chol` is the lower Cholesky factor of state.cov on entry and of the
// returned covariance on exit.
inline StateEstimate unscented_update(const StateEstimate& state, StateMatrix& chol,
                                      const MeasVector& z, const MeasVector& r_diag,
                                      const UnscentedWeights& w, InnovationStats* stats) {
    const StateMatrix& cov = state.cov;
    const SigmaMatrix pts = sigma_points_from_factor(state.mean, chol, w);

    Eigen::Matrix<double, kMeasDim, kSigmaCount> zs;
    for (int i = 0; i < kSigmaCount; ++i) zs.col(i) = measure(pts.col(i));
    const MeasVector z_hat = weighted_mean<kMeasDim>(zs, w);

    MeasMatrix pzz = MeasMatrix::Zero();
    Eigen::Matrix<double, kStateDim, kMeasDim> pxz = Eigen::Matrix<double, kStateDim, kMeasDim>::Zero();
    for (int i = 0; i < kSigmaCount; ++i) {
        const MeasVector dz = zs.col(i) - z_hat;
        const StateVector dx = pts.col(i) - state.mean;
        pzz.noalias() += w.cov(i) * dz * dz.transpose();
        pxz.noalias() += w.cov(i) * dx * dz.transpose();
    }
    const MeasMatrix s = pzz + MeasMatrix(r_diag.asDiagonal());
    Eigen::FullPivLU<MeasMatrix> lu(s);
    if (!lu.isInvertible() || !s.allFinite())
        throw DivergenceError("innovation covariance singular", state.t);
    const Eigen::Matrix<double, kStateDim, kMeasDim> gain = pxz * lu.inverse();
    const MeasVector innovation = z - z_hat;

    StateEstimate out;
    out.t = state.t;
    out.mean = state.mean + gain * innovation;
    out.mean(kHeading) = wrap_angle(out.mean(kHeading));
    out.cov = cov - gain * s * gain.transpose();
    chol = condition_spd(out.cov, state.t);
    if (!out.mean.allFinite()) throw DivergenceError("non-finite state", state.t);
    if (stats) *stats = {innovation, pzz};
    return out;
}

inline StateEstimate unscented_predict(const StateEstimate& state, StateMatrix& chol,
                                       const ImuInput& imu, double dt, const FilterParams& params,
                                       const UnscentedWeights& w) {
    if (!(dt > 0.0)) throw std::invalid_argument("ukf_predict: dt must be > 0");
    const SigmaMatrix pts = sigma_points_from_factor(state.mean, chol, w);

    SigmaMatrix ys;
    for (int i = 0; i < kSigmaCount; ++i) ys.col(i) = propagate(pts.col(i), imu, dt);
    const StateVector y_mean = weighted_mean<kStateDim>(ys, w);

    StateMatrix p = StateMatrix::Zero();
    for (int i = 0; i < kSigmaCount; ++i) {
        const StateVector d = ys.col(i) - y_mean;
        p.noalias() += w.cov(i) * d * d.transpose();
    }
    p.diagonal() += params.q_diag * dt;

    StateEstimate out;
    out.t = state.t + dt;
    out.mean = y_mean;
    out.mean(kHeading) = wrap_angle(out.mean(kHeading));
    out.cov = p;
    chol = condition_spd(out.cov, out.t);
    if (!out.mean.allFinite()) throw DivergenceError("non-finite state", out.t);
    return out;
}

}  // namespace detail

/// Propagates every sigma point through the strapdown model and recombines;
/// cov += diag(q) * dt.
inline StateEstimate ukf_predict(const StateEstimate& state, const ImuInput& imu, double dt,
                                 const FilterParams& params) {
    params.validate();
    StateEstimate in = state;
    StateMatrix chol = condition_spd(in.cov, in.t);
    return detail::unscented_predict(in, chol, imu, dt, params, UnscentedWeights(params));
}

inline StateEstimate ukf_predict(const StateEstimate& state, const sim::ImuSample& imu, double dt,
                                 const FilterParams& params) {
    return ukf_predict(state, ImuInput::from(imu), dt, params);
}

/// Unscented GPS position update. Invalid fixes are rejected; callers skip
/// them during outages.
inline StateEstimate ukf_update(const StateEstimate& state, const sim::GpsFix& fix,
                                const FilterParams& params) {
    if (!fix.valid) throw std::invalid_argument("ukf_update: fix is flagged invalid");
    params.validate();
    StateEstimate in = state;
    StateMatrix chol = condition_spd(in.cov, in.t);
    return detail::unscented_update(in, chol, MeasVector(fix.x, fix.y), params.r_diag,
                                    UnscentedWeights(params), nullptr);
}

/// Full UKF pass over a dataset, one estimate per IMU sample.
inline FilterRun run_filter(const FilterParams& params, const sim::SensorDataset& d,
                            const StateEstimate& init) {
    params.validate();
    const UnscentedWeights w(params);
    StateEstimate start = init;
    StateMatrix chol = condition_spd(start.cov, start.t);
    return run_multirate(
        d, start,
        [&](const StateEstimate& s, const ImuInput& u, double dt) {
            return detail::unscented_predict(s, chol, u, dt, params, w);
        },
        [&](const StateEstimate& s, const sim::GpsFix& f) {
            return detail::unscented_update(s, chol, MeasVector(f.x, f.y), params.r_diag, w, nullptr);
        });
}

inline FilterRun run_filter(const FilterParams& params, const sim::SensorDataset& d) {
    return run_filter(params, d, initial_estimate(d));
}

}  // namespace fusionlab::filter

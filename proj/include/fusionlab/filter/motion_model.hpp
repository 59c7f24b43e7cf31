#pragma once

#include <cmath>

#include "fusionlab/filter/types.hpp"
#include "fusionlab/sim/sensors.hpp"

namespace fusionlab::filter {

/// IMU reading driving one prediction interval.
struct ImuInput {
    double ax = 0.0, ay = 0.0;  // body frame
    double yaw_rate = 0.0;

    static ImuInput from(const sim::ImuSample& s) { return {s.ax, s.ay, s.yaw_rate}; }

    /// Trapezoidal average of the samples bracketing an interval.
    static ImuInput between(const sim::ImuSample& a, const sim::ImuSample& b) {
        return {0.5 * (a.ax + b.ax), 0.5 * (a.ay + b.ay), 0.5 * (a.yaw_rate + b.yaw_rate)};
    }
};

/// Planar strapdown step. Body acceleration is rotated into the world frame
/// with the mid-interval heading; heading is left unwrapped so sigma points
/// near +-pi stay continuous.
inline StateVector propagate(const StateVector& x, const ImuInput& u, double dt) {
    const double mid = x(kHeading) + 0.5 * u.yaw_rate * dt;
    const double c = std::cos(mid);
    const double s = std::sin(mid);
    const double awx = c * u.ax - s * u.ay;
    const double awy = s * u.ax + c * u.ay;
    StateVector out;
    out(kX) = x(kX) + x(kVx) * dt + 0.5 * awx * dt * dt;
    out(kY) = x(kY) + x(kVy) * dt + 0.5 * awy * dt * dt;
    out(kVx) = x(kVx) + awx * dt;
    out(kVy) = x(kVy) + awy * dt;
    out(kHeading) = x(kHeading) + u.yaw_rate * dt;
    return out;
}

/// d propagate / d x.
inline StateMatrix propagate_jacobian(const StateVector& x, const ImuInput& u, double dt) {
    const double mid = x(kHeading) + 0.5 * u.yaw_rate * dt;
    const double c = std::cos(mid);
    const double s = std::sin(mid);
    const double awx = c * u.ax - s * u.ay;
    const double awy = s * u.ax + c * u.ay;
    StateMatrix f = StateMatrix::Identity();
    f(kX, kVx) = dt;
    f(kY, kVy) = dt;
    f(kX, kHeading) = -0.5 * awy * dt * dt;
    f(kY, kHeading) = 0.5 * awx * dt * dt;
    f(kVx, kHeading) = -awy * dt;
    f(kVy, kHeading) = awx * dt;
    return f;
}

/// GPS observes position directly.
inline MeasVector measure(const StateVector& x) { return x.head<kMeasDim>(); }

inline Eigen::Matrix<double, kMeasDim, kStateDim> measure_jacobian() {
    Eigen::Matrix<double, kMeasDim, kStateDim> h = Eigen::Matrix<double, kMeasDim, kStateDim>::Zero();
    h(0, kX) = 1.0;
    h(1, kY) = 1.0;
    return h;
}

}  // namespace fusionlab::filter

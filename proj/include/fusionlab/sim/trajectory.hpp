#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "fusionlab/angles.hpp"
#include "fusionlab/sim/scenario.hpp"

namespace fusionlab::sim {

struct GroundTruthState {
    double t = 0.0;
    double x = 0.0, y = 0.0;       // m, world frame
    double vx = 0.0, vy = 0.0;     // m/s, world frame
    double heading = 0.0;          // rad, wrapped to (-pi, pi]
    double ax_body = 0.0, ay_body = 0.0;
    double yaw_rate = 0.0;

    bool operator==(const GroundTruthState&) const = default;
};

namespace detail {

// Quintic smoothstep and derivatives; C2 at both ends.
inline double smooth(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

inline double smooth_d1(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return 30.0 * u * u * (1.0 - u) * (1.0 - u);
}

}  // namespace detail

/// Speed and heading of a maneuver as analytic functions of time since
/// scenario start.
struct MotionSample {
    double speed;       // m/s, >= 0
    double accel;       // d speed / dt
    double heading;     // rad, unwrapped
    double yaw_rate;    // d heading / dt
};

class MotionProfile {
public:
    explicit MotionProfile(const ScenarioConfig& c) : cfg_(c) {}

    MotionSample at(double tau) const {
        const auto& p = cfg_.profile;
        const double h0 = p.initial_heading;
        switch (cfg_.maneuver) {
        case Maneuver::StraightCruise500m:
            return {kCruiseDistance / cfg_.duration_s, 0.0, h0, 0.0};
        case Maneuver::SharpTurn90: {
            const double u = (tau - p.turn_start_s) / p.turn_duration_s;
            const double sweep = kPi / 2.0;
            return {p.turn_speed, 0.0, h0 + sweep * detail::smooth(u),
                    sweep * detail::smooth_d1(u) / p.turn_duration_s};
        }
        case Maneuver::RapidAccel0to60in5s: {
            const double u = tau / kAccelDuration;
            return {kAccelTargetSpeed * detail::smooth(u),
                    kAccelTargetSpeed * detail::smooth_d1(u) / kAccelDuration, h0, 0.0};
        }
        case Maneuver::AbruptBrake50to0in2s: {
            const double u = (tau - p.brake_start_s) / kBrakeDuration;
            return {kBrakeInitialSpeed * (1.0 - detail::smooth(u)),
                    -kBrakeInitialSpeed * detail::smooth_d1(u) / kBrakeDuration, h0, 0.0};
        }
        case Maneuver::GpsOutage3to5s: {
            const double w = 2.0 * kPi / p.weave_period_s;
            return {p.outage_speed, 0.0, h0 + p.weave_amplitude * std::sin(w * tau),
                    p.weave_amplitude * w * std::cos(w * tau)};
        }
        }
        return {};
    }

    /// World-frame velocity at tau.
    std::array<double, 2> velocity(double tau) const {
        const auto m = at(tau);
        return {m.speed * std::cos(m.heading), m.speed * std::sin(m.heading)};
    }

private:
    ScenarioConfig cfg_;
};

/// Samples the maneuver at the IMU rate. Positions are the integral of the
/// analytic velocity, evaluated with 5-point Gauss-Legendre quadrature on
/// every IMU interval.
inline std::vector<GroundTruthState> generate_ground_truth(const ScenarioConfig& config) {
    config.validate();
    const MotionProfile profile(config);
    const std::size_t n = config.imu_sample_count();

    static constexpr std::array<double, 5> kNodes = {
        -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
    static constexpr std::array<double, 5> kWeights = {
        0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
        0.2369268850561891};

    std::vector<GroundTruthState> out;
    out.reserve(n);
    double x = 0.0, y = 0.0;
    double prev_tau = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double tau = static_cast<double>(k) / config.imu_rate_hz;
        if (k > 0) {
            const double half = 0.5 * (tau - prev_tau);
            const double mid = 0.5 * (tau + prev_tau);
            double dx = 0.0, dy = 0.0;
            for (std::size_t i = 0; i < kNodes.size(); ++i) {
                const auto v = profile.velocity(mid + half * kNodes[i]);
                dx += kWeights[i] * v[0];
                dy += kWeights[i] * v[1];
            }
            x += half * dx;
            y += half * dy;
        }
        prev_tau = tau;

        const auto m = profile.at(tau);
        GroundTruthState s;
        s.t = config.start_s + tau;
        s.x = x;
        s.y = y;
        s.vx = m.speed * std::cos(m.heading);
        s.vy = m.speed * std::sin(m.heading);
        s.heading = wrap_angle(m.heading);
        s.ax_body = m.accel;
        s.ay_body = m.speed * m.yaw_rate;
        s.yaw_rate = m.yaw_rate;
        out.push_back(s);
    }
    return out;
}

}  // namespace fusionlab::sim

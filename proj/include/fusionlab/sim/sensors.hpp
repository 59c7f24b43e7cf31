#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "fusionlab/random.hpp"
#include "fusionlab/sim/scenario.hpp"
#include "fusionlab/sim/trajectory.hpp"

namespace fusionlab::sim {

struct ImuSample {
    double t = 0.0;
    double ax = 0.0, ay = 0.0;   // m/s^2, body frame
    double yaw_rate = 0.0;       // rad/s
    // Injected biases, kept for audit only; filters never read them.
    double bias_ax = 0.0, bias_ay = 0.0, bias_gz = 0.0;

    bool operator==(const ImuSample&) const = default;
};

struct GpsFix {
    double t = 0.0;
    double x = 0.0, y = 0.0;
    bool valid = true;

    bool operator==(const GpsFix&) const = default;
};

inline constexpr std::uint64_t kImuStream = 0x696d75ULL;
inline constexpr std::uint64_t kGpsStream = 0x677073ULL;

/// Truth plus white noise plus a random-walk bias on every channel.
inline std::vector<ImuSample> synthesize_imu(const std::vector<GroundTruthState>& truth,
                                             const NoiseProfile& profile, std::uint64_t seed) {
    if (truth.empty()) throw std::invalid_argument("synthesize_imu: empty truth");
    profile.validate();
    auto rng = make_engine(derive_seed(seed, kImuStream));
    std::normal_distribution<double> gauss(0.0, 1.0);

    double bax = profile.initial_accel_bias;
    double bay = profile.initial_accel_bias;
    double bgz = profile.initial_gyro_bias;
    std::vector<ImuSample> out;
    out.reserve(truth.size());
    for (std::size_t k = 0; k < truth.size(); ++k) {
        const auto& s = truth[k];
        if (k > 0) {
            const double sq = std::sqrt(s.t - truth[k - 1].t);
            bax += profile.accel_bias_walk * sq * gauss(rng);
            bay += profile.accel_bias_walk * sq * gauss(rng);
            bgz += profile.gyro_bias_walk * sq * gauss(rng);
        }
        ImuSample m;
        m.t = s.t;
        m.ax = s.ax_body + bax + profile.accel_sigma * gauss(rng);
        m.ay = s.ay_body + bay + profile.accel_sigma * profile.lateral_accel_factor * gauss(rng);
        m.yaw_rate = s.yaw_rate + bgz + profile.gyro_sigma * gauss(rng);
        m.bias_ax = bax;
        m.bias_ay = bay;
        m.bias_gz = bgz;
        out.push_back(m);
    }
    return out;
}

/// Decimates truth to the GPS rate and adds Gaussian position noise. Fixes
/// inside an outage window are kept but flagged invalid.
inline std::vector<GpsFix> synthesize_gps(const std::vector<GroundTruthState>& truth,
                                          const NoiseProfile& profile,
                                          const ScenarioConfig& config, std::uint64_t seed) {
    if (truth.empty()) throw std::invalid_argument("synthesize_gps: empty truth");
    profile.validate();
    auto rng = make_engine(derive_seed(seed, kGpsStream));
    std::normal_distribution<double> gauss(0.0, 1.0);

    const std::size_t decimation = static_cast<std::size_t>(config.gps_decimation());
    std::vector<GpsFix> out;
    out.reserve(truth.size() / decimation + 1);
    for (std::size_t k = 0; k < truth.size(); k += decimation) {
        const auto& s = truth[k];
        GpsFix f;
        f.t = s.t;
        f.x = s.x + profile.gps_sigma * gauss(rng);
        f.y = s.y + profile.gps_sigma * gauss(rng);
        for (const auto& w : config.outage_windows)
            if (w.contains(f.t)) f.valid = false;
        out.push_back(f);
    }
    return out;
}

}  // namespace fusionlab::sim

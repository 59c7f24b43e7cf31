#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fusionlab/angles.hpp"
#include "fusionlab/random.hpp"

namespace fusionlab::sim {

/// Thrown for scenario definitions that cannot be simulated.
class ScenarioError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Maneuver {
    StraightCruise500m,
    SharpTurn90,
    RapidAccel0to60in5s,
    AbruptBrake50to0in2s,
    GpsOutage3to5s,
};

enum class Environment { Clear, Night, Rain, Fog, Slippery };

inline constexpr std::array kAllManeuvers = {
    Maneuver::StraightCruise500m, Maneuver::SharpTurn90, Maneuver::RapidAccel0to60in5s,
    Maneuver::AbruptBrake50to0in2s, Maneuver::GpsOutage3to5s};

inline constexpr std::array kAllEnvironments = {Environment::Clear, Environment::Night,
                                                Environment::Rain, Environment::Fog,
                                                Environment::Slippery};

inline std::string_view to_string(Maneuver m) {
    switch (m) {
    case Maneuver::StraightCruise500m: return "StraightCruise500m";
    case Maneuver::SharpTurn90: return "SharpTurn90";
    case Maneuver::RapidAccel0to60in5s: return "RapidAccel0to60in5s";
    case Maneuver::AbruptBrake50to0in2s: return "AbruptBrake50to0in2s";
    case Maneuver::GpsOutage3to5s: return "GpsOutage3to5s";
    }
    return "?";
}

inline std::string_view to_string(Environment e) {
    switch (e) {
    case Environment::Clear: return "Clear";
    case Environment::Night: return "Night";
    case Environment::Rain: return "Rain";
    case Environment::Fog: return "Fog";
    case Environment::Slippery: return "Slippery";
    }
    return "?";
}

inline std::optional<Maneuver> parse_maneuver(std::string_view s) {
    for (auto m : kAllManeuvers)
        if (to_string(m) == s) return m;
    return std::nullopt;
}

inline std::optional<Environment> parse_environment(std::string_view s) {
    for (auto e : kAllEnvironments)
        if (to_string(e) == s) return e;
    return std::nullopt;
}

/// Half-open interval [start_s, end_s) during which GPS fixes are invalid.
struct OutageWindow {
    double start_s = 0.0;
    double end_s = 0.0;

    double length() const { return end_s - start_s; }
    bool contains(double t) const { return t >= start_s && t < end_s; }
    bool operator==(const OutageWindow&) const = default;
};

/// Sensor noise magnitudes. Sigmas are per-sample standard deviations, bias
/// walks are random-walk densities (unit per sqrt(s)).
struct NoiseProfile {
    double gps_sigma = 1.5;
    double accel_sigma = 0.05;
    double gyro_sigma = 0.005;
    double accel_bias_walk = 0.001;
    double gyro_bias_walk = 0.0001;
    // Multiplier on the lateral (body y) accelerometer noise; > 1 models low-grip surfaces.
    double lateral_accel_factor = 1.0;
    // Constant bias present from t = 0, on top of the random walk.
    double initial_accel_bias = 0.0;
    double initial_gyro_bias = 0.0;

    static NoiseProfile zero() {
        return {0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0};
    }

    void validate() const {
        for (double v : {gps_sigma, accel_sigma, gyro_sigma, accel_bias_walk, gyro_bias_walk,
                         lateral_accel_factor})
            if (!(v >= 0.0) || !std::isfinite(v))
                throw ScenarioError("noise profile values must be finite and >= 0");
    }

    bool operator==(const NoiseProfile&) const = default;
};

/// Default consumer-grade noise levels per environment.
inline NoiseProfile noise_for(Environment env) {
    NoiseProfile p;
    switch (env) {
    case Environment::Clear: break;
    case Environment::Night: p.gps_sigma *= 1.2; break;
    case Environment::Rain:
        p.gps_sigma *= 2.0;
        p.accel_sigma *= 1.5;
        p.gyro_sigma *= 1.5;
        p.accel_bias_walk *= 1.5;
        p.gyro_bias_walk *= 1.5;
        break;
    case Environment::Fog: p.gps_sigma *= 3.0; break;
    case Environment::Slippery: p.lateral_accel_factor = 2.0; break;
    }
    return p;
}

/// Shape parameters of the maneuver speed/heading profiles.
struct ProfileParams {
    double initial_heading = 0.0;     // rad
    double turn_speed = 5.0;          // m/s, SharpTurn90
    double turn_start_s = 8.0;        // s after scenario start
    double turn_duration_s = 6.0;
    double brake_start_s = 10.0;      // AbruptBrake50to0in2s
    double outage_speed = 12.0;       // m/s, GpsOutage3to5s cruising speed
    double weave_amplitude = 0.3;     // rad, heading oscillation during GpsOutage3to5s
    double weave_period_s = 20.0;
    int outage_count = 4;             // windows placed when none are given

    bool operator==(const ProfileParams&) const = default;
};

inline constexpr double kCruiseDistance = 500.0;       // m
inline constexpr double kMaxCruiseSpeed = 40.0;        // m/s
inline constexpr double kAccelTargetSpeed = 60.0 / 3.6;
inline constexpr double kAccelDuration = 5.0;
inline constexpr double kBrakeInitialSpeed = 50.0 / 3.6;
inline constexpr double kBrakeDuration = 2.0;
inline constexpr double kMinOutage = 3.0;
inline constexpr double kMaxOutage = 5.0;

/// One maneuver x environment x seed experiment.
struct ScenarioConfig {
    std::string name;
    Maneuver maneuver = Maneuver::StraightCruise500m;
    Environment environment = Environment::Clear;
    double start_s = 0.0;
    double duration_s = 40.0;
    int imu_rate_hz = 100;
    int gps_rate_hz = 5;
    std::uint64_t seed = 1;
    std::vector<OutageWindow> outage_windows;
    NoiseProfile noise = noise_for(Environment::Clear);
    ProfileParams profile;

    double end_s() const { return start_s + duration_s; }
    int gps_decimation() const { return imu_rate_hz / gps_rate_hz; }

    /// Number of IMU samples covering [start_s, end_s].
    std::size_t imu_sample_count() const {
        return static_cast<std::size_t>(std::floor(duration_s * imu_rate_hz + 1e-9)) + 1;
    }

    /// Shortest duration for which the maneuver profile is complete.
    double minimum_duration() const {
        switch (maneuver) {
        case Maneuver::StraightCruise500m: return kCruiseDistance / kMaxCruiseSpeed;
        case Maneuver::SharpTurn90: return profile.turn_start_s + profile.turn_duration_s;
        case Maneuver::RapidAccel0to60in5s: return kAccelDuration;
        case Maneuver::AbruptBrake50to0in2s: return profile.brake_start_s + kBrakeDuration;
        case Maneuver::GpsOutage3to5s: return profile.outage_count * (kMaxOutage + 1.0);
        }
        return 0.0;
    }

    void validate() const {
        if (!(duration_s > 0.0) || !std::isfinite(duration_s))
            throw ScenarioError("duration_s must be > 0");
        if (imu_rate_hz <= 0 || gps_rate_hz <= 0)
            throw ScenarioError("sensor rates must be positive");
        if (imu_rate_hz % gps_rate_hz != 0)
            throw ScenarioError("imu_rate_hz must be an integer multiple of gps_rate_hz");
        if (duration_s + 1e-9 < minimum_duration())
            throw ScenarioError("duration_s " + std::to_string(duration_s) + " too short for " +
                                std::string(to_string(maneuver)) + " (needs " +
                                std::to_string(minimum_duration()) + " s)");
        noise.validate();
        const double eps = 1e-9;
        for (std::size_t i = 0; i < outage_windows.size(); ++i) {
            const auto& w = outage_windows[i];
            if (!(w.end_s > w.start_s))
                throw ScenarioError("outage window must have end > start");
            if (w.start_s < start_s - eps || w.end_s > end_s() + eps)
                throw ScenarioError("outage window outside scenario span");
            // Windows cut by the span edge (split datasets) are partial and exempt.
            const bool interior = w.start_s > start_s + eps && w.end_s < end_s() - eps;
            if (maneuver == Maneuver::GpsOutage3to5s && interior &&
                (w.length() < kMinOutage - eps || w.length() > kMaxOutage + eps))
                throw ScenarioError("GpsOutage3to5s windows must last 3-5 s");
            for (std::size_t j = 0; j < i; ++j) {
                const auto& o = outage_windows[j];
                if (w.start_s < o.end_s && o.start_s < w.end_s)
                    throw ScenarioError("outage windows overlap");
            }
        }
    }

    bool operator==(const ScenarioConfig&) const = default;
};

/// Draws outage windows for the outage maneuver: one window per equal time
/// slot, length uniform in [3, 5] s, start uniform within the slot. Times are
/// snapped to the IMU grid.
inline std::vector<OutageWindow> place_outage_windows(const ScenarioConfig& c) {
    std::vector<OutageWindow> out;
    const int n = c.profile.outage_count;
    if (n <= 0) return out;
    auto rng = make_engine(derive_seed(c.seed, 0x6f75746167ULL));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double slot = c.duration_s / n;
    const double grid = 1.0 / c.imu_rate_hz;
    const double margin = 0.5;
    for (int k = 0; k < n; ++k) {
        const double len = std::round((kMinOutage + (kMaxOutage - kMinOutage) * unit(rng)) / grid) * grid;
        const double lo = c.start_s + k * slot + margin;
        const double hi = std::max(lo, c.start_s + (k + 1) * slot - len - margin);
        const double start = std::round((lo + (hi - lo) * unit(rng)) / grid) * grid;
        out.push_back({start, start + std::clamp(len, kMinOutage, kMaxOutage)});
    }
    return out;
}

/// Initial heading drawn uniformly from [-pi, pi) with the scenario seed.
inline double draw_initial_heading(std::uint64_t seed) {
    auto rng = make_engine(derive_seed(seed, 0x68656164ULL));
    return std::uniform_real_distribution<double>(-kPi, kPi)(rng);
}

inline ScenarioConfig make_scenario(Maneuver m, Environment e, double duration_s,
                                    std::uint64_t seed) {
    ScenarioConfig c;
    c.name = std::string(to_string(m)) + "_" + std::string(to_string(e));
    c.maneuver = m;
    c.environment = e;
    c.duration_s = duration_s;
    c.seed = seed;
    c.noise = noise_for(e);
    if (m == Maneuver::GpsOutage3to5s) c.outage_windows = place_outage_windows(c);
    return c;
}

}  // namespace fusionlab::sim

#pragma once

#include <cmath>
#include <numbers>

namespace fusionlab {

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
    double r = std::remainder(a, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

inline constexpr double rad_to_deg(double r) { return r * 180.0 / kPi; }

}  // namespace fusionlab

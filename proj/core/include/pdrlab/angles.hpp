#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace pdrlab {

inline constexpr double kPi = std::numbers::pi;

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
    double r = std::fmod(a, 2.0 * kPi);
    if (r <= -kPi) {
        r += 2.0 * kPi;
    } else if (r > kPi) {
        r -= 2.0 * kPi;
    }
    return r;
}

/// Interpolate between two angles on the unit circle (avoids +/-pi wrap
/// artifacts that plain linear interpolation would introduce).
inline double lerp_angle(double a, double b, double alpha) {
    const double sa = (1.0 - alpha) * std::sin(a) + alpha * std::sin(b);
    const double ca = (1.0 - alpha) * std::cos(a) + alpha * std::cos(b);
    if (sa == 0.0 && ca == 0.0) return a;  // antipodal midpoint, keep left value
    return std::atan2(sa, ca);
}

/// Circular mean of a set of angles; returns 0 for an empty set.
inline double circular_mean(std::span<const double> angles) {
    double s = 0.0, c = 0.0;
    for (double a : angles) {
        s += std::sin(a);
        c += std::cos(a);
    }
    if (s == 0.0 && c == 0.0) return 0.0;
    return std::atan2(s, c);
}

}  // namespace pdrlab

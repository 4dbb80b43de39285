#pragma once

#include <array>

namespace pdrlab::classic {

/// Orientation filter state. The quaternion is scalar-first and rotates body
/// into world coordinates. gyro_bias is a constant z-rate calibration value
/// subtracted from the gyro before integration (the artifact drives only the
/// yaw axis).
struct OrientationState {
    std::array<double, 4> q{1.0, 0.0, 0.0, 0.0};  // (w, x, y, z), unit norm
    double gyro_bias = 0.0;                       // rad/s
};

/// One gradient-descent orientation update from gyro + accelerometer (no
/// magnetometer). The gyro rate is integrated exactly over dt (quaternion
/// exponential), then the quaternion is nudged against the normalized
/// gradient of the gravity-alignment error with step size beta*dt and
/// renormalized. Zero-norm accel skips the correction (gyro-only step).
OrientationState madgwick_update(const OrientationState& state,
                                 const std::array<double, 3>& gyro,
                                 const std::array<double, 3>& accel,
                                 double beta,
                                 double dt);

/// Yaw (rotation about world z) of a body->world quaternion.
double yaw_of(const std::array<double, 4>& q);

/// Angle between body z and world z (0 = level).
double tilt_of(const std::array<double, 4>& q);

}  // namespace pdrlab::classic

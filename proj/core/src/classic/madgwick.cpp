#include "pdrlab/classic/madgwick.hpp"

#include <cmath>

#include "pdrlab/errors.hpp"

namespace pdrlab::classic {

namespace {

using Quat = std::array<double, 4>;

Quat multiply(const Quat& a, const Quat& b) {
    return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
            a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
            a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
            a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

void normalize(Quat& q) {
    const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    if (n == 0.0) throw NumericError("madgwick_update: quaternion collapsed to zero norm");
    for (double& c : q) c /= n;
}

}  // namespace

OrientationState madgwick_update(const OrientationState& state,
                                 const std::array<double, 3>& gyro,
                                 const std::array<double, 3>& accel,
                                 double beta,
                                 double dt) {
    if (dt <= 0.0) throw ConfigError("madgwick_update: dt must be > 0");
    if (beta < 0.0) throw ConfigError("madgwick_update: beta must be >= 0");

    OrientationState out = state;
    const double wx = gyro[0];
    const double wy = gyro[1];
    const double wz = gyro[2] - state.gyro_bias;

    // Exact rate integration: q <- q * exp(omega*dt/2). Keeps pure-gyro yaw
    // integration free of first-order Euler error.
    const double wn = std::sqrt(wx * wx + wy * wy + wz * wz);
    if (wn > 0.0) {
        const double half = 0.5 * wn * dt;
        const double s = std::sin(half) / wn;
        const Quat dq{std::cos(half), wx * s, wy * s, wz * s};
        out.q = multiply(out.q, dq);
    }

    const double an = std::sqrt(accel[0] * accel[0] + accel[1] * accel[1] + accel[2] * accel[2]);
    if (beta > 0.0 && an > 1e-12) {
        const double ax = accel[0] / an, ay = accel[1] / an, az = accel[2] / an;
        const double w = out.q[0], x = out.q[1], y = out.q[2], z = out.q[3];

        // Gravity-alignment objective f(q) = R(q)^T e_z - a_hat. R(q)^T e_z
        // is the third row of the body->world rotation matrix.
        const double f1 = 2.0 * (x * z - w * y) - ax;
        const double f2 = 2.0 * (y * z + w * x) - ay;
        const double f3 = 1.0 - 2.0 * (x * x + y * y) - az;

        // grad = J^T f with J the Jacobian of f wrt (w, x, y, z). The raw
        // gradient (no normalization) vanishes at the optimum, so the
        // correction decays smoothly instead of chattering at a fixed step.
        const double g0 = -2.0 * y * f1 + 2.0 * x * f2;
        const double g1 = 2.0 * z * f1 + 2.0 * w * f2 - 4.0 * x * f3;
        const double g2 = -2.0 * w * f1 + 2.0 * z * f2 - 4.0 * y * f3;
        const double g3 = 2.0 * x * f1 + 2.0 * y * f2;

        const double step = beta * dt;
        out.q[0] -= step * g0;
        out.q[1] -= step * g1;
        out.q[2] -= step * g2;
        out.q[3] -= step * g3;
    }

    normalize(out.q);
    return out;
}

double yaw_of(const std::array<double, 4>& q) {
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    return std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
}

double tilt_of(const std::array<double, 4>& q) {
    const double x = q[1], y = q[2];
    // R33 = cos(tilt) for a body->world rotation.
    double r33 = 1.0 - 2.0 * (x * x + y * y);
    if (r33 > 1.0) r33 = 1.0;
    if (r33 < -1.0) r33 = -1.0;
    return std::acos(r33);
}

}  // namespace pdrlab::classic

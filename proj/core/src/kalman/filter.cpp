#include "pdrlab/kalman/filter.hpp"

#include <algorithm>
#include <cmath>

#include "pdrlab/errors.hpp"

namespace pdrlab::kalman {

namespace {

Eigen::Matrix4d transition(double dt) {
    Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
    f(0, 2) = dt;
    f(1, 3) = dt;
    return f;
}

Eigen::Matrix4d process_noise(double dt, double q0) {
    const double a = q0 * dt * dt * dt / 3.0;
    const double b = q0 * dt * dt / 2.0;
    const double c = q0 * dt;
    Eigen::Matrix4d q = Eigen::Matrix4d::Zero();
    q(0, 0) = a;
    q(0, 2) = b;
    q(2, 0) = b;
    q(2, 2) = c;
    q(1, 1) = a;
    q(1, 3) = b;
    q(3, 1) = b;
    q(3, 3) = c;
    return q;
}

void symmetrize(Eigen::Matrix4d& p) { p = 0.5 * (p + p.transpose()).eval(); }

// Shared Joseph-form update for a 2-row selector H.
KfState joseph_update(const KfState& state, const Eigen::Matrix<double, 2, 4>& h,
                      const Eigen::Vector2d& z, double r) {
    const Eigen::Matrix2d s = h * state.P * h.transpose() + r * Eigen::Matrix2d::Identity();
    const Eigen::Matrix<double, 4, 2> k = state.P * h.transpose() * s.inverse();

    KfState out = state;
    out.x = state.x + k * (z - h * state.x);
    const Eigen::Matrix4d ikh = Eigen::Matrix4d::Identity() - k * h;
    out.P = ikh * state.P * ikh.transpose() + k * (r * Eigen::Matrix2d::Identity()) * k.transpose();
    symmetrize(out.P);
    return out;
}

}  // namespace

void KfConfig::validate() const {
    if (!(p0 > 0.0)) throw ConfigError("KfConfig.p0 must be > 0");
    if (!(q0 > 0.0)) throw ConfigError("KfConfig.q0 must be > 0");
    if (!(r_pos > 0.0)) throw ConfigError("KfConfig.r_pos must be > 0");
    if (!(r_vel > 0.0)) throw ConfigError("KfConfig.r_vel must be > 0");
}

KfState kf_init(const KfConfig& config, double t0) {
    KfState s;
    s.x = config.x0;
    s.P = config.p0 * Eigen::Matrix4d::Identity();
    s.t = t0;
    return s;
}

KfState kf_predict(const KfState& state, double dt, double q0) {
    if (!(dt > 0.0)) throw ConfigError("kf_predict: dt must be > 0");
    const Eigen::Matrix4d f = transition(dt);
    KfState out = state;
    out.x = f * state.x;
    out.P = f * state.P * f.transpose() + process_noise(dt, q0);
    symmetrize(out.P);
    out.t = state.t + dt;
    return out;
}

KfState kf_update_position(const KfState& state, const Eigen::Vector2d& z, double r_pos, bool* rejected) {
    if (!(r_pos > 0.0)) throw ConfigError("kf_update_position: r_pos must be > 0");
    if (rejected) *rejected = false;
    if (!z.allFinite()) {
        if (rejected) *rejected = true;
        return state;
    }
    Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    return joseph_update(state, h, z, r_pos);
}

KfState kf_update_velocity(const KfState& state, double speed, double theta, double r_vel, bool* rejected) {
    if (!(r_vel > 0.0)) throw ConfigError("kf_update_velocity: r_vel must be > 0");
    if (rejected) *rejected = false;
    if (!std::isfinite(speed) || !std::isfinite(theta)) {
        if (rejected) *rejected = true;
        return state;
    }
    const Eigen::Vector2d z(speed * std::cos(theta), speed * std::sin(theta));
    Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
    h(0, 2) = 1.0;
    h(1, 3) = 1.0;
    return joseph_update(state, h, z, r_vel);
}

std::vector<PoseEstimate> kf_run(std::span<const SensorSample> samples,
                                 const KfConfig& config,
                                 const KfRunOptions& opts,
                                 KfRunStats* stats) {
    config.validate();
    if (!(opts.fs_out > 0.0)) throw ConfigError("kf_run: fs_out must be > 0");
    if (opts.horizon < 0.0) throw ConfigError("kf_run: horizon must be >= 0");
    if (samples.empty()) throw DataError("kf_run: empty sample stream");

    std::vector<const SensorSample*> order;
    order.reserve(samples.size());
    for (const auto& s : samples) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(), [](const SensorSample* a, const SensorSample* b) {
        return a->t_avail < b->t_avail;
    });

    double t_min = samples.front().t_meas, t_max = samples.front().t_meas;
    for (const auto& s : samples) {
        t_min = std::min(t_min, s.t_meas);
        t_max = std::max(t_max, s.t_meas);
    }
    double t0 = std::ceil(t_min * opts.fs_out - 1e-9) / opts.fs_out;
    if (t0 == 0.0) t0 = 0.0;  // normalize -0
    const auto ticks = static_cast<std::size_t>(std::floor((t_max - t0) * opts.fs_out + 1e-9)) + 1;

    KfState state = kf_init(config, t0);
    KfRunStats local;
    KfRunStats& st = stats ? *stats : local;

    // Heading memory for vectorizing scalar speed: movement direction from
    // radio fixes while moving, the latest heading sample otherwise. The
    // direction is measured against an anchor fix at least kHeadingDisp away
    // so fix noise cannot dominate the displacement.
    constexpr double kHeadingDisp = 0.5;     // m
    constexpr double kStationaryTime = 2.0;  // s without enough displacement
    bool have_anchor = false;
    Eigen::Vector2d anchor = Eigen::Vector2d::Zero();
    double anchor_t = 0.0;
    double theta_radio = 0.0;
    bool have_theta_radio = false;
    bool moving = false;
    double theta_ori = 0.0;
    bool have_theta_ori = false;
    Eigen::Vector2d accel_ctl = Eigen::Vector2d::Zero();

    std::size_t si = 0;
    std::vector<PoseEstimate> out;
    out.reserve(ticks);

    auto ingest = [&](const SensorSample& s) {
        if (s.t_avail > state.t) state = kf_predict(state, s.t_avail - state.t, config.q0);
        bool rej = false;
        switch (s.modality) {
            case Modality::radio_pos: {
                const Eigen::Vector2d z(s.values[0], s.values[1]);
                state = kf_update_position(state, z, config.r_pos, &rej);
                if (!rej) {
                    ++st.position_updates;
                    if (!have_anchor) {
                        anchor = z;
                        anchor_t = s.t_meas;
                        have_anchor = true;
                    } else if ((z - anchor).norm() >= kHeadingDisp) {
                        const Eigen::Vector2d d = z - anchor;
                        theta_radio = std::atan2(d.y(), d.x());
                        have_theta_radio = true;
                        moving = true;
                        anchor = z;
                        anchor_t = s.t_meas;
                    } else if (s.t_meas - anchor_t > kStationaryTime) {
                        moving = false;  // barely displaced for a while
                        anchor = z;
                        anchor_t = s.t_meas;
                    }
                }
                break;
            }
            case Modality::speed: {
                double theta;
                if (moving && have_theta_radio) theta = theta_radio;
                else if (have_theta_ori) theta = theta_ori;
                else if (have_theta_radio) theta = theta_radio;
                else break;  // no usable heading yet
                state = kf_update_velocity(state, s.values[0], theta, config.r_vel, &rej);
                if (!rej) ++st.velocity_updates;
                break;
            }
            case Modality::heading:
                theta_ori = s.values[0];
                have_theta_ori = true;
                break;
            case Modality::accel:
                if (opts.accel_as_control && std::isfinite(s.values[0]) && std::isfinite(s.values[1]))
                    accel_ctl = Eigen::Vector2d(s.values[0], s.values[1]);
                break;
            case Modality::gyro:
                break;  // no use in the constant-velocity model
        }
        if (rej) ++st.rejected_updates;
    };

    for (std::size_t k = 0; k < ticks; ++k) {
        const double t = t0 + static_cast<double>(k) / opts.fs_out;
        while (si < order.size() && order[si]->t_avail <= t) ingest(*order[si++]);

        KfState fc = state;
        const double ahead = t + opts.horizon - fc.t;
        if (ahead > 0.0) {
            fc = kf_predict(fc, ahead, config.q0);
            if (opts.accel_as_control) {
                // Body-frame (forward, lateral) accel rotated into the world
                // by the velocity direction estimate.
                const double psi = std::atan2(state.x(3), state.x(2));
                const double ax = std::cos(psi) * accel_ctl.x() - std::sin(psi) * accel_ctl.y();
                const double ay = std::sin(psi) * accel_ctl.x() + std::cos(psi) * accel_ctl.y();
                fc.x(0) += 0.5 * ax * ahead * ahead;
                fc.x(1) += 0.5 * ay * ahead * ahead;
                fc.x(2) += ax * ahead;
                fc.x(3) += ay * ahead;
            }
        }
        out.push_back({t + opts.horizon, fc.x(0), fc.x(1), fc.P(0, 0), fc.P(1, 1), opts.horizon, false});
    }
    return out;
}

}  // namespace pdrlab::kalman

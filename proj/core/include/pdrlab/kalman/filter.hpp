#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "pdrlab/types.hpp"

namespace pdrlab::kalman {

/// Linear constant-velocity filter configuration. Defaults follow the tuned
/// baseline: x0 = 0, P0 = 1, Q0 = 0.1, R = 0.1.
struct KfConfig {
    double p0 = 1.0;
    double q0 = 0.1;
    double r_pos = 0.1;   // m^2
    double r_vel = 0.1;   // (m/s)^2
    Eigen::Vector4d x0 = Eigen::Vector4d::Zero();  // (px, py, vx, vy)

    void validate() const;
};

struct KfState {
    Eigen::Vector4d x = Eigen::Vector4d::Zero();
    Eigen::Matrix4d P = Eigen::Matrix4d::Identity();
    double t = 0.0;
};

KfState kf_init(const KfConfig& config, double t0);

/// Constant-velocity propagation with discretized white-acceleration process
/// noise: per axis Q(dt) = q0 * [[dt^3/3, dt^2/2], [dt^2/2, dt]].
KfState kf_predict(const KfState& state, double dt, double q0);

/// Position measurement update (Joseph-form covariance for PSD robustness).
/// Non-finite measurements are rejected: the state is returned unchanged and
/// *rejected (when given) set.
KfState kf_update_position(const KfState& state, const Eigen::Vector2d& z, double r_pos,
                           bool* rejected = nullptr);

/// Scalar speed + heading as a direct (vx, vy) measurement with isotropic
/// variance (a linear filter cannot ingest a speed magnitude directly).
KfState kf_update_velocity(const KfState& state, double speed, double theta, double r_vel,
                           bool* rejected = nullptr);

struct KfRunOptions {
    double fs_out = 100.0;  // estimate grid rate
    double horizon = 0.0;   // forecast offset; estimates refer to grid time + horizon
    bool accel_as_control = false;  // optional arm: feed accel samples as a control input
};

struct KfRunStats {
    int rejected_updates = 0;
    int position_updates = 0;
    int velocity_updates = 0;
};

/// Run the filter over a sample stream in availability order (realtime
/// causal: a measurement is applied once its t_avail is reached, which makes
/// transport delay cost accuracy exactly as it would online). Estimates are
/// emitted on a uniform grid; with horizon > 0 each estimate is a pure
/// prediction that far ahead of the grid time.
std::vector<PoseEstimate> kf_run(std::span<const SensorSample> samples,
                                 const KfConfig& config,
                                 const KfRunOptions& opts = {},
                                 KfRunStats* stats = nullptr);

}  // namespace pdrlab::kalman

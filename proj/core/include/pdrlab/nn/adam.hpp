#pragma once

#include <Eigen/Dense>

#include "pdrlab/nn/spec.hpp"

namespace pdrlab::nn {

struct AdamState {
    Eigen::VectorXd m;  // first moment
    Eigen::VectorXd v;  // second moment
    long step = 0;
    int skipped = 0;  // non-finite gradients encountered and skipped

    explicit AdamState(Eigen::Index n) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

/// Scale the gradient so its global norm is at most max_norm (no-op when
/// max_norm is 0). Returns the pre-clip norm.
double clip_global_norm(Eigen::VectorXd& grad, double max_norm);

/// One Adam update with bias correction. A non-finite gradient skips the
/// step entirely (weights, moments and step count untouched) and bumps
/// state.skipped.
void adam_step(Eigen::VectorXd& weights, Eigen::VectorXd grad, AdamState& state,
               const TrainConfig& config, double lr);

}  // namespace pdrlab::nn

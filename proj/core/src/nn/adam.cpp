#include "pdrlab/nn/adam.hpp"

#include <cmath>

#include "pdrlab/errors.hpp"

namespace pdrlab::nn {

double clip_global_norm(Eigen::VectorXd& grad, double max_norm) {
    const double norm = grad.norm();
    if (max_norm > 0.0 && norm > max_norm) grad *= max_norm / norm;
    return norm;
}

void adam_step(Eigen::VectorXd& weights, Eigen::VectorXd grad, AdamState& state,
               const TrainConfig& config, double lr) {
    if (weights.size() != grad.size() || weights.size() != state.m.size())
        throw ConfigError("adam_step: dimension mismatch");
    if (!grad.allFinite()) {
        ++state.skipped;
        return;
    }
    clip_global_norm(grad, config.grad_clip);

    ++state.step;
    state.m = config.beta1 * state.m + (1.0 - config.beta1) * grad;
    state.v = config.beta2 * state.v + (1.0 - config.beta2) * grad.cwiseProduct(grad);

    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    const Eigen::ArrayXd m_hat = state.m.array() / bc1;
    const Eigen::ArrayXd v_hat = state.v.array() / bc2;
    weights.array() -= lr * m_hat / (v_hat.sqrt() + config.eps);
}

}  // namespace pdrlab::nn

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pdrlab/nn/params.hpp"
#include "pdrlab/nn/spec.hpp"

namespace pdrlab::nn {

/// Everything the backward pass needs from one training-mode forward pass.
struct ForwardCache {
    Eigen::MatrixXd x;  // ticks x input_dim
    std::vector<Eigen::MatrixXd> ff_in;  // per layer: ticks x width (post-tanh)
    struct LstmLayer {
        Eigen::MatrixXd input;                     // ticks x in_dim
        Eigen::MatrixXd i, f, g, o, c, tanh_c, h;  // ticks x cells
    };
    std::vector<LstmLayer> lstm;
    Eigen::VectorXd dropout_mask;       // scaled inverted-dropout mask (ones when inactive)
    Eigen::VectorXd dropped;            // masked top hidden state
    std::vector<Eigen::VectorXd> head;  // per output layer activation (last is linear)
    Eigen::VectorXd output;
};

/// Sequence-to-one regression network: per-tick FF (affine+tanh) -> stacked
/// LSTM over the window -> last-tick hidden state -> dropout -> FF head with
/// a linear output layer. Deterministic given weights, inputs and the
/// dropout mask seed.
class Network {
public:
    explicit Network(NetworkSpec spec);
    Network(NetworkSpec spec, Eigen::VectorXd params);

    const NetworkSpec& spec() const { return spec_; }
    const ParamLayout& layout() const { return layout_; }
    const Eigen::VectorXd& params() const { return params_; }
    Eigen::VectorXd& params() { return params_; }

    /// Inference forward: dropout inactive.
    Eigen::VectorXd forward(const Eigen::MatrixXd& x) const;

    /// Training forward: inverted dropout with a seeded mask, activations
    /// cached for backward().
    Eigen::VectorXd forward_train(const Eigen::MatrixXd& x, uint64_t dropout_seed, ForwardCache& cache) const;

    /// Exact gradient of 0.5*||y - target||^2 + l2 * sum_W ||W||^2 through
    /// all ticks and layers (backpropagation through time).
    Eigen::VectorXd backward(const ForwardCache& cache, const Eigen::VectorXd& target, double l2) const;

    /// Loss value matching backward()'s objective.
    double loss(const Eigen::VectorXd& output, const Eigen::VectorXd& target, double l2) const;

private:
    Eigen::VectorXd run(const Eigen::MatrixXd& x, bool train, uint64_t dropout_seed, ForwardCache* cache) const;

    NetworkSpec spec_;
    ParamLayout layout_;
    Eigen::VectorXd params_;
};

}  // namespace pdrlab::nn

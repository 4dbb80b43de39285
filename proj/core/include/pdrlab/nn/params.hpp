#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pdrlab/nn/spec.hpp"

namespace pdrlab::nn {

/// One named tensor inside the flat parameter vector. Weight matrices take
/// part in L2 regularization; bias vectors do not.
struct TensorInfo {
    std::string name;
    Eigen::Index offset = 0;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;  // 1 for bias vectors
    bool is_weight = false;

    Eigen::Index size() const { return rows * cols; }
};

/// Deterministic flat layout of all parameters:
///   ff_in.0.W, ff_in.0.b, ..., lstm.0.Wx, lstm.0.Wh, lstm.0.b, ...,
///   ff_out.0.W, ff_out.0.b, ...
/// LSTM gate rows are stacked [input, forget, candidate, output], each
/// `cells` rows tall.
class ParamLayout {
public:
    static ParamLayout build(const NetworkSpec& spec);

    Eigen::Index total_size() const { return total_; }
    const std::vector<TensorInfo>& tensors() const { return tensors_; }
    const TensorInfo& tensor(const std::string& name) const;

    Eigen::Map<Eigen::MatrixXd> matrix(Eigen::VectorXd& params, const TensorInfo& info) const {
        return {params.data() + info.offset, info.rows, info.cols};
    }
    Eigen::Map<const Eigen::MatrixXd> matrix(const Eigen::VectorXd& params, const TensorInfo& info) const {
        return {params.data() + info.offset, info.rows, info.cols};
    }

private:
    std::vector<TensorInfo> tensors_;
    Eigen::Index total_ = 0;
};

/// Glorot-uniform input weights, orthogonal recurrent weights, zero biases
/// with the LSTM forget gate biased to 1. Deterministic for a given seed.
Eigen::VectorXd init_params(const NetworkSpec& spec, const ParamLayout& layout);

/// Gradient of the L2 term l2 * sum_W ||W||^2 (weights only).
void add_l2_gradient(const ParamLayout& layout, const Eigen::VectorXd& params, double l2,
                     Eigen::VectorXd& grad);

/// Value of the L2 term.
double l2_penalty(const ParamLayout& layout, const Eigen::VectorXd& params, double l2);

}  // namespace pdrlab::nn

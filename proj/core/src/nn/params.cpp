#include "pdrlab/nn/params.hpp"

#include <cmath>

#include "pdrlab/errors.hpp"
#include "pdrlab/rng.hpp"

namespace pdrlab::nn {

ParamLayout ParamLayout::build(const NetworkSpec& spec) {
    spec.validate();
    ParamLayout layout;
    auto add = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols, bool is_weight) {
        layout.tensors_.push_back({name, layout.total_, rows, cols, is_weight});
        layout.total_ += rows * cols;
    };

    int in = spec.input_dim;
    for (std::size_t i = 0; i < spec.ff_in_dims.size(); ++i) {
        const int outd = spec.ff_in_dims[i];
        add("ff_in." + std::to_string(i) + ".W", outd, in, true);
        add("ff_in." + std::to_string(i) + ".b", outd, 1, false);
        in = outd;
    }
    for (int l = 0; l < spec.lstm_layers; ++l) {
        const int h = spec.lstm_cells;
        add("lstm." + std::to_string(l) + ".Wx", 4 * h, in, true);
        add("lstm." + std::to_string(l) + ".Wh", 4 * h, h, true);
        add("lstm." + std::to_string(l) + ".b", 4 * h, 1, false);
        in = h;
    }
    for (std::size_t i = 0; i < spec.ff_out_dims.size(); ++i) {
        const int outd = spec.ff_out_dims[i];
        add("ff_out." + std::to_string(i) + ".W", outd, in, true);
        add("ff_out." + std::to_string(i) + ".b", outd, 1, false);
        in = outd;
    }
    return layout;
}

const TensorInfo& ParamLayout::tensor(const std::string& name) const {
    for (const auto& t : tensors_)
        if (t.name == name) return t;
    throw ConfigError("unknown parameter tensor: " + name);
}

namespace {

void glorot_uniform(Eigen::Map<Eigen::MatrixXd> m, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-limit, limit);
}

// Orthogonal blocks per gate: QR of a square Gaussian matrix with the sign
// fixed so the decomposition is unique.
void orthogonal_per_gate(Eigen::Map<Eigen::MatrixXd> m, int cells, Rng& rng) {
    for (int g = 0; g < 4; ++g) {
        Eigen::MatrixXd a(cells, cells);
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = rng.normal();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(cells, cells);
        const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int c = 0; c < cells; ++c)
            if (r(c, c) < 0.0) q.col(c) = -q.col(c);
        m.block(g * cells, 0, cells, cells) = q;
    }
}

}  // namespace

Eigen::VectorXd init_params(const NetworkSpec& spec, const ParamLayout& layout) {
    Eigen::VectorXd params = Eigen::VectorXd::Zero(layout.total_size());
    Rng rng(substream_seed(spec.init_seed, "init"));

    for (const auto& t : layout.tensors()) {
        auto m = layout.matrix(params, t);
        if (t.name.ends_with(".Wh")) {
            orthogonal_per_gate(m, spec.lstm_cells, rng);
        } else if (t.is_weight) {
            glorot_uniform(m, rng);
        } else if (t.name.starts_with("lstm.") && t.name.ends_with(".b")) {
            m.setZero();
            m.block(spec.lstm_cells, 0, spec.lstm_cells, 1).setOnes();  // forget gate bias 1
        } else {
            m.setZero();
        }
    }
    return params;
}

void add_l2_gradient(const ParamLayout& layout, const Eigen::VectorXd& params, double l2,
                     Eigen::VectorXd& grad) {
    if (l2 == 0.0) return;
    for (const auto& t : layout.tensors()) {
        if (!t.is_weight) continue;
        grad.segment(t.offset, t.size()) += 2.0 * l2 * params.segment(t.offset, t.size());
    }
}

double l2_penalty(const ParamLayout& layout, const Eigen::VectorXd& params, double l2) {
    if (l2 == 0.0) return 0.0;
    double sum = 0.0;
    for (const auto& t : layout.tensors()) {
        if (!t.is_weight) continue;
        sum += params.segment(t.offset, t.size()).squaredNorm();
    }
    return l2 * sum;
}

}  // namespace pdrlab::nn

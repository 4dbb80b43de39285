#include "pdrlab/nn/network.hpp"

#include <cmath>

#include "pdrlab/errors.hpp"
#include "pdrlab/rng.hpp"

namespace pdrlab::nn {

namespace {

inline Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& z) { return 1.0 / (1.0 + (-z).exp()); }

}  // namespace

Network::Network(NetworkSpec spec)
    : spec_(std::move(spec)), layout_(ParamLayout::build(spec_)), params_(init_params(spec_, layout_)) {}

Network::Network(NetworkSpec spec, Eigen::VectorXd params)
    : spec_(std::move(spec)), layout_(ParamLayout::build(spec_)), params_(std::move(params)) {
    if (params_.size() != layout_.total_size())
        throw ConfigError("Network: parameter vector size does not match the spec layout");
}

Eigen::VectorXd Network::forward(const Eigen::MatrixXd& x) const {
    return run(x, false, 0, nullptr);
}

Eigen::VectorXd Network::forward_train(const Eigen::MatrixXd& x, uint64_t dropout_seed,
                                       ForwardCache& cache) const {
    return run(x, true, dropout_seed, &cache);
}

Eigen::VectorXd Network::run(const Eigen::MatrixXd& x, bool train, uint64_t dropout_seed,
                             ForwardCache* cache) const {
    if (x.cols() != spec_.input_dim)
        throw ConfigError("Network::forward: input has " + std::to_string(x.cols()) +
                          " columns, spec expects " + std::to_string(spec_.input_dim));
    if (x.rows() < 1) throw ConfigError("Network::forward: empty input window");

    const auto ticks = x.rows();
    const int h = spec_.lstm_cells;
    const auto n_ff_in = spec_.ff_in_dims.size();
    const auto n_ff_out = spec_.ff_out_dims.size();

    if (cache) {
        cache->x = x;
        cache->ff_in.assign(n_ff_in, {});
        cache->lstm.assign(static_cast<std::size_t>(spec_.lstm_layers), {});
        cache->head.assign(n_ff_out, {});
        for (std::size_t i = 0; i < n_ff_in; ++i) cache->ff_in[i].resize(ticks, spec_.ff_in_dims[i]);
        int lstm_in = n_ff_in > 0 ? spec_.ff_in_dims.back() : spec_.input_dim;
        for (auto& l : cache->lstm) {
            l.input.resize(ticks, lstm_in);
            l.i.resize(ticks, h);
            l.f.resize(ticks, h);
            l.g.resize(ticks, h);
            l.o.resize(ticks, h);
            l.c.resize(ticks, h);
            l.tanh_c.resize(ticks, h);
            l.h.resize(ticks, h);
            lstm_in = h;
        }
    }

    std::vector<Eigen::VectorXd> h_prev(static_cast<std::size_t>(spec_.lstm_layers), Eigen::VectorXd::Zero(h));
    std::vector<Eigen::VectorXd> c_prev(static_cast<std::size_t>(spec_.lstm_layers), Eigen::VectorXd::Zero(h));

    Eigen::VectorXd a;
    for (Eigen::Index t = 0; t < ticks; ++t) {
        a = x.row(t).transpose();

        for (std::size_t i = 0; i < n_ff_in; ++i) {
            const auto& wi = layout_.tensor("ff_in." + std::to_string(i) + ".W");
            const auto& bi = layout_.tensor("ff_in." + std::to_string(i) + ".b");
            a = (layout_.matrix(params_, wi) * a + layout_.matrix(params_, bi).col(0)).array().tanh().matrix();
            if (cache) cache->ff_in[i].row(t) = a.transpose();
        }

        for (int l = 0; l < spec_.lstm_layers; ++l) {
            const auto& wx = layout_.tensor("lstm." + std::to_string(l) + ".Wx");
            const auto& wh = layout_.tensor("lstm." + std::to_string(l) + ".Wh");
            const auto& b = layout_.tensor("lstm." + std::to_string(l) + ".b");
            const auto lu = static_cast<std::size_t>(l);

            if (cache) cache->lstm[lu].input.row(t) = a.transpose();

            Eigen::VectorXd gates = layout_.matrix(params_, wx) * a +
                                    layout_.matrix(params_, wh) * h_prev[lu] +
                                    layout_.matrix(params_, b).col(0);
            const Eigen::ArrayXd gi = sigmoid(gates.segment(0, h).array());
            const Eigen::ArrayXd gf = sigmoid(gates.segment(h, h).array());
            const Eigen::ArrayXd gg = gates.segment(2 * h, h).array().tanh();
            const Eigen::ArrayXd go = sigmoid(gates.segment(3 * h, h).array());

            const Eigen::ArrayXd c = gf * c_prev[lu].array() + gi * gg;
            const Eigen::ArrayXd tc = c.tanh();
            const Eigen::ArrayXd hh = go * tc;

            if (cache) {
                auto& lc = cache->lstm[lu];
                lc.i.row(t) = gi.transpose();
                lc.f.row(t) = gf.transpose();
                lc.g.row(t) = gg.transpose();
                lc.o.row(t) = go.transpose();
                lc.c.row(t) = c.transpose();
                lc.tanh_c.row(t) = tc.transpose();
                lc.h.row(t) = hh.transpose();
            }
            c_prev[lu] = c.matrix();
            h_prev[lu] = hh.matrix();
            a = h_prev[lu];
        }
    }

    // a now holds the top layer's last-tick hidden state.
    Eigen::VectorXd mask = Eigen::VectorXd::Ones(h);
    if (train && spec_.dropout_rate > 0.0) {
        Rng rng(substream_seed(dropout_seed, "dropout"));
        const double keep = 1.0 - spec_.dropout_rate;
        for (int i = 0; i < h; ++i) mask(i) = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
    }
    Eigen::VectorXd dropped = a.cwiseProduct(mask);
    if (cache) {
        cache->dropout_mask = mask;
        cache->dropped = dropped;
    }

    a = dropped;
    for (std::size_t j = 0; j < n_ff_out; ++j) {
        const auto& wj = layout_.tensor("ff_out." + std::to_string(j) + ".W");
        const auto& bj = layout_.tensor("ff_out." + std::to_string(j) + ".b");
        a = layout_.matrix(params_, wj) * a + layout_.matrix(params_, bj).col(0);
        if (j + 1 < n_ff_out) a = a.array().tanh().matrix();  // linear output layer
        if (cache) cache->head[j] = a;
    }
    if (cache) cache->output = a;
    return a;
}

Eigen::VectorXd Network::backward(const ForwardCache& cache, const Eigen::VectorXd& target,
                                  double l2) const {
    if (target.size() != spec_.output_dim())
        throw ConfigError("Network::backward: target dimension mismatch");
    const auto ticks = cache.x.rows();
    const int h = spec_.lstm_cells;
    const auto n_ff_in = spec_.ff_in_dims.size();
    const auto n_ff_out = spec_.ff_out_dims.size();

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(layout_.total_size());

    // Output head.
    Eigen::VectorXd d = cache.output - target;  // d(0.5*||y-t||^2)/dy
    for (std::size_t j = n_ff_out; j-- > 0;) {
        const auto& wj = layout_.tensor("ff_out." + std::to_string(j) + ".W");
        const auto& bj = layout_.tensor("ff_out." + std::to_string(j) + ".b");
        Eigen::VectorXd dz = d;
        if (j + 1 < n_ff_out) dz = d.cwiseProduct((1.0 - cache.head[j].array().square()).matrix());
        const Eigen::VectorXd& a_in = j == 0 ? cache.dropped : cache.head[j - 1];
        layout_.matrix(grad, wj).noalias() += dz * a_in.transpose();
        layout_.matrix(grad, bj).col(0) += dz;
        d = layout_.matrix(params_, wj).transpose() * dz;
    }
    d = d.cwiseProduct(cache.dropout_mask);  // through inverted dropout

    // Backpropagation through time, top LSTM layer first. dout[t] carries the
    // gradient flowing into h_{l,t} from above (head or the next layer up).
    Eigen::MatrixXd dout = Eigen::MatrixXd::Zero(ticks, h);
    dout.row(ticks - 1) = d.transpose();

    Eigen::MatrixXd dinput;
    for (int l = spec_.lstm_layers; l-- > 0;) {
        const auto lu = static_cast<std::size_t>(l);
        const auto& lc = cache.lstm[lu];
        const auto& wx = layout_.tensor("lstm." + std::to_string(l) + ".Wx");
        const auto& wh = layout_.tensor("lstm." + std::to_string(l) + ".Wh");
        const auto& b = layout_.tensor("lstm." + std::to_string(l) + ".b");
        auto g_wx = layout_.matrix(grad, wx);
        auto g_wh = layout_.matrix(grad, wh);
        auto g_b = layout_.matrix(grad, b);
        const auto p_wx = layout_.matrix(params_, wx);
        const auto p_wh = layout_.matrix(params_, wh);

        dinput.setZero(ticks, lc.input.cols());
        Eigen::ArrayXd dh_carry = Eigen::ArrayXd::Zero(h);
        Eigen::ArrayXd dc_carry = Eigen::ArrayXd::Zero(h);

        for (Eigen::Index t = ticks; t-- > 0;) {
            const Eigen::ArrayXd dh = dout.row(t).transpose().array() + dh_carry;
            const Eigen::ArrayXd i = lc.i.row(t).transpose().array();
            const Eigen::ArrayXd f = lc.f.row(t).transpose().array();
            const Eigen::ArrayXd g = lc.g.row(t).transpose().array();
            const Eigen::ArrayXd o = lc.o.row(t).transpose().array();
            const Eigen::ArrayXd tc = lc.tanh_c.row(t).transpose().array();
            const Eigen::ArrayXd c_prev = t > 0 ? lc.c.row(t - 1).transpose().array()
                                                : Eigen::ArrayXd::Zero(h).eval();

            const Eigen::ArrayXd dc = dh * o * (1.0 - tc.square()) + dc_carry;
            Eigen::VectorXd dgates(4 * h);
            dgates.segment(0, h) = (dc * g * i * (1.0 - i)).matrix();          // input gate
            dgates.segment(h, h) = (dc * c_prev * f * (1.0 - f)).matrix();     // forget gate
            dgates.segment(2 * h, h) = (dc * i * (1.0 - g.square())).matrix(); // candidate
            dgates.segment(3 * h, h) = (dh * tc * o * (1.0 - o)).matrix();     // output gate

            g_wx.noalias() += dgates * lc.input.row(t);
            if (t > 0) g_wh.noalias() += dgates * lc.h.row(t - 1);
            g_b.col(0) += dgates;

            dinput.row(t) += (p_wx.transpose() * dgates).transpose();
            dh_carry = (p_wh.transpose() * dgates).array();
            dc_carry = dc * f;
        }
        dout = dinput;  // feeds the layer below (its h is this layer's input)
    }

    // Per-tick FF input stack.
    for (Eigen::Index t = 0; t < ticks; ++t) {
        Eigen::VectorXd dd = dout.row(t).transpose();
        for (std::size_t i = n_ff_in; i-- > 0;) {
            const auto& wi = layout_.tensor("ff_in." + std::to_string(i) + ".W");
            const auto& bi = layout_.tensor("ff_in." + std::to_string(i) + ".b");
            const Eigen::ArrayXd act = cache.ff_in[i].row(t).transpose().array();
            const Eigen::VectorXd dz = dd.cwiseProduct((1.0 - act.square()).matrix());
            const Eigen::VectorXd a_in = i == 0 ? cache.x.row(t).transpose()
                                                : cache.ff_in[i - 1].row(t).transpose();
            layout_.matrix(grad, wi).noalias() += dz * a_in.transpose();
            layout_.matrix(grad, bi).col(0) += dz;
            dd = layout_.matrix(params_, wi).transpose() * dz;
        }
    }

    add_l2_gradient(layout_, params_, l2, grad);
    return grad;
}

double Network::loss(const Eigen::VectorXd& output, const Eigen::VectorXd& target, double l2) const {
    return 0.5 * (output - target).squaredNorm() + l2_penalty(layout_, params_, l2);
}

}  // namespace pdrlab::nn

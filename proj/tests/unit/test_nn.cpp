#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "pdrlab/nn/adam.hpp"
#include "pdrlab/nn/checkpoint.hpp"
#include "pdrlab/nn/network.hpp"
#include "pdrlab/nn/predict.hpp"
#include "pdrlab/nn/train.hpp"
#include "pdrlab/rng.hpp"

using namespace pdrlab;
using namespace pdrlab::nn;

namespace {

NetworkSpec tiny_spec(int input_dim, int cells, double dropout = 0.0) {
    NetworkSpec s;
    s.input_dim = input_dim;
    s.ff_in_dims = {3};
    s.lstm_cells = cells;
    s.dropout_rate = dropout;
    s.ff_out_dims = {2};
    s.init_seed = 5;
    return s;
}

Eigen::MatrixXd random_input(Eigen::Index rows, Eigen::Index cols, uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) x(r, c) = rng.normal();
    return x;
}

double loss_at(Network& net, const Eigen::MatrixXd& x, const Eigen::VectorXd& target,
               uint64_t dropout_seed, double l2) {
    ForwardCache cache;
    const auto y = net.forward_train(x, dropout_seed, cache);
    return net.loss(y, target, l2);
}

// Central finite differences over every parameter.
double max_gradcheck_error(Network& net, const Eigen::MatrixXd& x, const Eigen::VectorXd& target,
                           uint64_t dropout_seed, double l2, double eps = 1e-5) {
    ForwardCache cache;
    net.forward_train(x, dropout_seed, cache);
    const Eigen::VectorXd analytic = net.backward(cache, target, l2);

    double worst = 0.0;
    for (Eigen::Index i = 0; i < net.params().size(); ++i) {
        const double saved = net.params()(i);
        net.params()(i) = saved + eps;
        const double up = loss_at(net, x, target, dropout_seed, l2);
        net.params()(i) = saved - eps;
        const double dn = loss_at(net, x, target, dropout_seed, l2);
        net.params()(i) = saved;
        const double numeric = (up - dn) / (2.0 * eps);
        const double rel = std::abs(analytic(i) - numeric) /
                           std::max(1e-8, std::abs(analytic(i)) + std::abs(numeric));
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace

TEST_CASE("forward: all-zero parameters produce a zero output") {
    Network net(tiny_spec(4, 5));
    net.params().setZero();
    const auto y = net.forward(random_input(6, 4, 1));
    CHECK(y.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forward: inference is bitwise deterministic") {
    Network net(tiny_spec(4, 5));
    const auto x = random_input(8, 4, 2);
    const auto a = net.forward(x);
    const auto b = net.forward(x);
    for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(a(i) == b(i));
}

TEST_CASE("forward: single-cell LSTM matches hand-computed recurrences") {
    NetworkSpec spec;
    spec.input_dim = 1;
    spec.ff_in_dims = {};  // feed the LSTM directly
    spec.lstm_cells = 1;
    spec.dropout_rate = 0.0;
    spec.ff_out_dims = {1};
    Network net(spec);

    auto& layout = net.layout();
    auto wx = layout.matrix(net.params(), layout.tensor("lstm.0.Wx"));
    auto wh = layout.matrix(net.params(), layout.tensor("lstm.0.Wh"));
    auto b = layout.matrix(net.params(), layout.tensor("lstm.0.b"));
    auto wo = layout.matrix(net.params(), layout.tensor("ff_out.0.W"));
    auto bo = layout.matrix(net.params(), layout.tensor("ff_out.0.b"));
    wx << 0.5, -0.3, 0.8, 0.2;   // gates i, f, g, o
    wh << 0.1, 0.4, -0.2, 0.3;
    b << 0.05, 1.0, -0.1, 0.0;
    wo << 1.0;
    bo << 0.0;

    Eigen::MatrixXd x(2, 1);
    x << 0.7, -1.2;

    const auto sigmoid = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    double h = 0.0, c = 0.0;
    for (int t = 0; t < 2; ++t) {
        const double xi = x(t, 0);
        const double gi = sigmoid(0.5 * xi + 0.1 * h + 0.05);
        const double gf = sigmoid(-0.3 * xi + 0.4 * h + 1.0);
        const double gg = std::tanh(0.8 * xi - 0.2 * h - 0.1);
        const double go = sigmoid(0.2 * xi + 0.3 * h + 0.0);
        c = gf * c + gi * gg;
        h = go * std::tanh(c);
    }
    const auto y = net.forward(x);
    CHECK(std::abs(y(0) - h) < 1e-12);
}

TEST_CASE("backward: zero error with zero regularization gives zero gradients") {
    Network net(tiny_spec(3, 4));
    const auto x = random_input(5, 3, 3);
    ForwardCache cache;
    const auto y = net.forward_train(x, 0, cache);
    const auto grad = net.backward(cache, y, 0.0);
    CHECK(grad.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("backward: pure regularizer gradient is 2*l2*W on weights only") {
    Network net(tiny_spec(3, 4));
    const double l2 = 0.01;
    const auto x = random_input(5, 3, 4);
    ForwardCache cache;
    const auto y = net.forward_train(x, 0, cache);
    const auto grad = net.backward(cache, y, l2);

    for (const auto& t : net.layout().tensors()) {
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            const double g = grad(t.offset + i);
            const double expected = t.is_weight ? 2.0 * l2 * net.params()(t.offset + i) : 0.0;
            CHECK(std::abs(g - expected) < 1e-12);
        }
    }
}

TEST_CASE("backward: gradients match central finite differences") {
    SUBCASE("no dropout") {
        Network net(tiny_spec(3, 4));
        const auto x = random_input(2, 3, 6);
        Eigen::VectorXd target(2);
        target << 0.3, -0.8;
        CHECK(max_gradcheck_error(net, x, target, 0, 1e-4) < 1e-4);
    }
    SUBCASE("active dropout with a fixed mask seed") {
        Network net(tiny_spec(3, 4, 0.5));
        const auto x = random_input(2, 3, 7);
        Eigen::VectorXd target(2);
        target << -0.1, 0.6;
        CHECK(max_gradcheck_error(net, x, target, 42, 1e-4) < 1e-4);
    }
    SUBCASE("two stacked LSTM layers and a deep head") {
        NetworkSpec spec = tiny_spec(3, 3);
        spec.lstm_layers = 2;
        spec.ff_out_dims = {4, 2};
        Network net(spec);
        const auto x = random_input(3, 3, 8);
        Eigen::VectorXd target(2);
        target << 0.0, 1.0;
        CHECK(max_gradcheck_error(net, x, target, 0, 1e-5) < 1e-4);
    }
}

TEST_CASE("adam_step: closed forms") {
    TrainConfig cfg;
    cfg.grad_clip = 0.0;

    SUBCASE("zero gradient leaves weights untouched") {
        Eigen::VectorXd w = Eigen::VectorXd::Constant(4, 1.5);
        const Eigen::VectorXd before = w;
        AdamState st(4);
        adam_step(w, Eigen::VectorXd::Zero(4), st, cfg, 0.01);
        CHECK((w - before).cwiseAbs().maxCoeff() == 0.0);
        CHECK(st.step == 1);
    }

    SUBCASE("moments decay by beta under a zero gradient") {
        AdamState st(2);
        st.m << 1.0, -2.0;
        st.v << 0.5, 0.5;
        Eigen::VectorXd w = Eigen::VectorXd::Zero(2);
        adam_step(w, Eigen::VectorXd::Zero(2), st, cfg, 0.0);  // lr 0: observe moments only
        CHECK(st.m(0) == doctest::Approx(cfg.beta1 * 1.0));
        CHECK(st.v(0) == doctest::Approx(cfg.beta2 * 0.5));
    }

    SUBCASE("first step from zero state follows the sign-like closed form") {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(3);
        Eigen::VectorXd g(3);
        g << 0.2, -0.05, 0.7;
        AdamState st(3);
        const double lr = 0.01;
        adam_step(w, g, st, cfg, lr);
        for (int i = 0; i < 3; ++i) {
            const double expected = -lr * g(i) / (std::abs(g(i)) + cfg.eps);
            CHECK(std::abs(w(i) - expected) < 1e-12);
        }
    }

    SUBCASE("global-norm clipping") {
        Eigen::VectorXd g = Eigen::VectorXd::Constant(100, 1.0);  // norm 10
        const double before = clip_global_norm(g, 1.0);
        CHECK(before == doctest::Approx(10.0));
        CHECK(g.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("non-finite gradients skip the step") {
        Eigen::VectorXd w = Eigen::VectorXd::Constant(2, 3.0);
        Eigen::VectorXd g(2);
        g << 1.0, std::numeric_limits<double>::infinity();
        AdamState st(2);
        adam_step(w, g, st, cfg, 0.01);
        CHECK(w(0) == 3.0);
        CHECK(st.step == 0);
        CHECK(st.skipped == 1);
    }
}

namespace {

// Toy task: windows trace straight lines; the target is the last-tick
// position (identity-like, easily learnable).
WindowDataset toy_dataset(std::size_t n, uint64_t seed) {
    WindowDataset ds;
    ds.channels = {"p"};
    ds.window = 8;
    ds.stride = 8;
    ds.mask_cols = 0;
    ds.fs = 100.0;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        TrainWindow w;
        w.x.resize(8, 2);
        const double ax = rng.normal(0, 0.4), ay = rng.normal(0, 0.4);
        const double bx = rng.normal(0, 0.5), by = rng.normal(0, 0.5);
        for (int t = 0; t < 8; ++t) {
            w.x(t, 0) = ax + bx * t * 0.1;
            w.x(t, 1) = ay + by * t * 0.1;
        }
        w.target = {w.x(7, 0), w.x(7, 1)};
        w.t_target = static_cast<double>(i);
        ds.items.push_back(std::move(w));
    }
    return ds;
}

TrainConfig toy_config() {
    TrainConfig cfg;
    cfg.lr0 = 0.02;
    cfg.batch = 8;
    cfg.max_epochs = 50;
    cfg.early_stop_patience = 50;
    cfg.l2_weight = 1e-6;
    cfg.lr_halve_every = 15;
    cfg.seed = 3;
    return cfg;
}

NetworkSpec toy_net() {
    NetworkSpec spec;
    spec.input_dim = 0;
    spec.ff_in_dims = {16};
    spec.lstm_cells = 16;
    spec.dropout_rate = 0.0;
    spec.ff_out_dims = {2};
    spec.init_seed = 3;
    return spec;
}

double dataset_mse(const Checkpoint& ckpt, const WindowDataset& ds) {
    Network net(ckpt.spec, ckpt.weights);
    double sum = 0.0;
    for (const auto& w : ds.items) {
        Eigen::MatrixXd x = w.x;
        ckpt.normalize(x);
        const Eigen::Vector2d y = ckpt.denormalize(net.forward(x));
        sum += (y - w.target).squaredNorm();
    }
    return sum / static_cast<double>(ds.items.size());
}

}  // namespace

TEST_CASE("train: learns the toy endpoint task to sub-1e-3 MSE") {
    const auto full = toy_dataset(400, 11);
    const auto [tr, va] = split_dataset(full, 0.2, 1);
    const auto ckpt = train(tr, va, toy_net(), toy_config());
    CHECK(ckpt.meta.epochs_run <= 50);
    CHECK(dataset_mse(ckpt, va) < 1e-3);
}

TEST_CASE("train: zero patience stops right after the first non-improving epoch") {
    const auto full = toy_dataset(64, 12);
    const auto [tr, va] = split_dataset(full, 0.2, 1);
    auto cfg = toy_config();
    cfg.lr0 = 2.0;  // wild steps: validation loss will bounce
    cfg.early_stop_patience = 0;
    cfg.max_epochs = 50;
    const auto ckpt = train(tr, va, toy_net(), cfg);
    CHECK(ckpt.meta.epochs_run < 50);
    CHECK(ckpt.meta.epochs_run == ckpt.meta.best_epoch + 2);
}

TEST_CASE("train: identical seeds and data give bitwise-identical checkpoints") {
    const auto full = toy_dataset(64, 13);
    const auto [tr, va] = split_dataset(full, 0.2, 1);
    auto cfg = toy_config();
    cfg.max_epochs = 5;
    const auto a = train(tr, va, toy_net(), cfg);
    const auto b = train(tr, va, toy_net(), cfg);
    REQUIRE(a.weights.size() == b.weights.size());
    for (Eigen::Index i = 0; i < a.weights.size(); ++i) CHECK(a.weights(i) == b.weights(i));
    CHECK(a.meta.val_loss == b.meta.val_loss);
}

TEST_CASE("train: normalization statistics are part of the function") {
    const auto full = toy_dataset(64, 14);
    const auto [tr, va] = split_dataset(full, 0.2, 1);
    auto cfg = toy_config();
    cfg.max_epochs = 3;

    const auto a = train(tr, va, toy_net(), cfg);

    // Pre-normalize with a's statistics, train with identity overrides.
    const auto normalize_ds = [&](const WindowDataset& ds) {
        WindowDataset out = ds;
        for (auto& w : out.items) {
            for (Eigen::Index c = 0; c < w.x.cols(); ++c) {
                const auto cu = static_cast<std::size_t>(c);
                w.x.col(c) = (w.x.col(c).array() - a.input_norm.mean[cu]) * a.input_norm.inv_std[cu];
            }
            w.target = {(w.target(0) - a.target_mean[0]) / a.target_std[0],
                        (w.target(1) - a.target_mean[1]) / a.target_std[1]};
        }
        return out;
    };
    NormOverride identity;
    identity.input.mean.assign(2, 0.0);
    identity.input.inv_std.assign(2, 1.0);
    const auto b = train(normalize_ds(tr), normalize_ds(va), toy_net(), cfg, identity);

    // Same seed on bitwise-equal normalized data: identical weights, and the
    // de-normalized predictions coincide exactly.
    for (Eigen::Index i = 0; i < a.weights.size(); ++i) CHECK(a.weights(i) == b.weights(i));

    Network na(a.spec, a.weights), nb(b.spec, b.weights);
    Eigen::MatrixXd x_raw = va.items[0].x;
    Eigen::MatrixXd xa = x_raw;
    a.normalize(xa);
    const Eigen::Vector2d ya = a.denormalize(na.forward(xa));
    Eigen::MatrixXd xb = x_raw;
    for (Eigen::Index c = 0; c < xb.cols(); ++c) {
        const auto cu = static_cast<std::size_t>(c);
        xb.col(c) = (xb.col(c).array() - a.input_norm.mean[cu]) * a.input_norm.inv_std[cu];
    }
    const Eigen::VectorXd yb_norm = nb.forward(xb);
    const Eigen::Vector2d yb{yb_norm(0) * a.target_std[0] + a.target_mean[0],
                             yb_norm(1) * a.target_std[1] + a.target_mean[1]};
    CHECK(ya(0) == yb(0));
    CHECK(ya(1) == yb(1));
}

TEST_CASE("checkpoint: save/load round trip is bitwise exact") {
    const auto full = toy_dataset(64, 15);
    const auto [tr, va] = split_dataset(full, 0.2, 1);
    auto cfg = toy_config();
    cfg.max_epochs = 2;
    const auto ckpt = train(tr, va, toy_net(), cfg);

    const auto path = std::filesystem::temp_directory_path() / "pdrlab_ckpt_test.bin";
    ckpt.save(path);
    const auto loaded = Checkpoint::load(path);
    std::filesystem::remove(path);

    REQUIRE(loaded.weights.size() == ckpt.weights.size());
    for (Eigen::Index i = 0; i < ckpt.weights.size(); ++i) CHECK(loaded.weights(i) == ckpt.weights(i));
    CHECK(loaded.input_norm.mean == ckpt.input_norm.mean);
    CHECK(loaded.input_norm.inv_std == ckpt.input_norm.inv_std);
    CHECK(loaded.target_mean == ckpt.target_mean);
    CHECK(loaded.meta.val_loss == ckpt.meta.val_loss);
    CHECK(loaded.output_mode == ckpt.output_mode);

    Network na(ckpt.spec, ckpt.weights), nb(loaded.spec, loaded.weights);
    Eigen::MatrixXd x = va.items[0].x;
    ckpt.normalize(x);
    const auto ya = na.forward(x);
    const auto yb = nb.forward(x);
    for (Eigen::Index i = 0; i < ya.size(); ++i) CHECK(ya(i) == yb(i));
}

TEST_CASE("mc_dropout_predict: variance semantics") {
    const auto full = toy_dataset(64, 16);
    const auto [tr, va] = split_dataset(full, 0.2, 1);
    auto cfg = toy_config();
    cfg.max_epochs = 2;

    SUBCASE("zero dropout rate gives zero variance for any pass count") {
        const auto ckpt = train(tr, va, toy_net(), cfg);
        const auto est = mc_dropout_predict(va.items[0].x, ckpt, 16, 1);
        CHECK(est.var_x == 0.0);
        CHECK(est.var_y == 0.0);
        CHECK_FALSE(est.degenerate);
    }

    SUBCASE("a single pass is flagged degenerate") {
        auto spec = toy_net();
        spec.dropout_rate = 0.5;
        const auto ckpt = train(tr, va, spec, cfg);
        const auto est = mc_dropout_predict(va.items[0].x, ckpt, 1, 1);
        CHECK(est.var_x == 0.0);
        CHECK(est.degenerate);
    }

    SUBCASE("MC mean approaches the long-run mean") {
        auto spec = toy_net();
        spec.dropout_rate = 0.5;
        const auto ckpt = train(tr, va, spec, cfg);
        const auto big = mc_dropout_predict(va.items[0].x, ckpt, 10000, 2);
        const auto small = mc_dropout_predict(va.items[0].x, ckpt, 200, 2);
        const double se_x = std::sqrt(small.var_x / 200.0);
        const double se_y = std::sqrt(small.var_y / 200.0);
        CHECK(std::abs(small.x - big.x) < 3.0 * se_x + 1e-12);
        CHECK(std::abs(small.y - big.y) < 3.0 * se_y + 1e-12);
    }
}

TEST_CASE("dropout expectation: scaled masks are unbiased") {
    // One linear layer after dropout: the expectation over masks of the
    // scaled output equals the dropout-free output.
    auto spec = tiny_spec(2, 6, 0.5);
    Network net(spec);
    const auto x = random_input(4, 2, 21);
    const auto ref = net.forward(x);

    const int K = 10000;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    std::vector<Eigen::Vector2d> ys;
    ForwardCache cache;
    for (int k = 0; k < K; ++k) {
        const auto y = net.forward_train(x, 1000 + static_cast<uint64_t>(k), cache);
        ys.emplace_back(y(0), y(1));
        mean += ys.back();
    }
    mean /= K;
    Eigen::Vector2d var = Eigen::Vector2d::Zero();
    for (const auto& y : ys) var += (y - mean).cwiseProduct(y - mean);
    var /= K - 1;
    for (int i = 0; i < 2; ++i) {
        const double se = std::sqrt(var(i) / K);
        CHECK(std::abs(mean(i) - ref(i)) <= 3.0 * se + 1e-12);
    }
}

TEST_CASE("network: dimension mismatches are rejected") {
    Network net(tiny_spec(3, 4));
    CHECK_THROWS_AS(net.forward(random_input(5, 2, 1)), ConfigError);
    ForwardCache cache;
    net.forward_train(random_input(5, 3, 1), 0, cache);
    CHECK_THROWS_AS(net.backward(cache, Eigen::VectorXd::Zero(3), 0.0), ConfigError);
}

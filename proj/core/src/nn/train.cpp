#include "pdrlab/nn/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "pdrlab/errors.hpp"
#include "pdrlab/nn/adam.hpp"
#include "pdrlab/rng.hpp"

namespace pdrlab::nn {

namespace {

// Fixed accumulation granularity: batch gradients are summed within chunks
// of this many windows and the chunk sums are combined in chunk order, so
// the result does not depend on how many workers processed them.
constexpr std::size_t kChunk = 64;

struct NormalizedSet {
    std::vector<Eigen::MatrixXd> x;
    std::vector<Eigen::Vector2d> target;
};

NormOverride compute_norm(const WindowDataset& train_set) {
    const auto cols = static_cast<std::size_t>(train_set.items.front().x.cols());
    const std::size_t data_cols = cols - static_cast<std::size_t>(train_set.mask_cols);

    NormOverride norm;
    norm.input.mean.assign(cols, 0.0);
    norm.input.inv_std.assign(cols, 1.0);

    std::size_t rows = 0;
    for (const auto& w : train_set.items) rows += static_cast<std::size_t>(w.x.rows());

    for (std::size_t c = 0; c < data_cols; ++c) {
        double sum = 0.0;
        for (const auto& w : train_set.items) sum += w.x.col(static_cast<Eigen::Index>(c)).sum();
        const double mean = sum / static_cast<double>(rows);
        double sq = 0.0;
        for (const auto& w : train_set.items)
            sq += (w.x.col(static_cast<Eigen::Index>(c)).array() - mean).square().sum();
        const double sd = std::sqrt(sq / static_cast<double>(rows));
        norm.input.mean[c] = mean;
        norm.input.inv_std[c] = sd > 1e-8 ? 1.0 / sd : 1.0;
    }
    // Validity-mask columns stay raw (identity statistics).

    for (int axis = 0; axis < 2; ++axis) {
        double sum = 0.0;
        for (const auto& w : train_set.items) sum += w.target(axis);
        const double mean = sum / static_cast<double>(train_set.items.size());
        double sq = 0.0;
        for (const auto& w : train_set.items) sq += (w.target(axis) - mean) * (w.target(axis) - mean);
        const double sd = std::sqrt(sq / static_cast<double>(train_set.items.size()));
        norm.target_mean[static_cast<std::size_t>(axis)] = mean;
        norm.target_std[static_cast<std::size_t>(axis)] = sd > 1e-8 ? sd : 1.0;
    }
    return norm;
}

NormalizedSet normalize_set(const WindowDataset& ds, const NormOverride& norm) {
    NormalizedSet out;
    out.x.reserve(ds.items.size());
    out.target.reserve(ds.items.size());
    for (const auto& w : ds.items) {
        Eigen::MatrixXd x = w.x;
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            const auto cu = static_cast<std::size_t>(c);
            x.col(c) = (x.col(c).array() - norm.input.mean[cu]) * norm.input.inv_std[cu];
        }
        out.x.push_back(std::move(x));
        out.target.emplace_back((w.target(0) - norm.target_mean[0]) / norm.target_std[0],
                                (w.target(1) - norm.target_mean[1]) / norm.target_std[1]);
    }
    return out;
}

}  // namespace

Checkpoint train(const WindowDataset& train_set,
                 const WindowDataset& val_set,
                 NetworkSpec spec,
                 const TrainConfig& config,
                 const std::optional<NormOverride>& norm_override) {
    config.validate();
    if (train_set.items.empty()) throw ConfigError("train: empty training split");
    if (val_set.items.empty()) throw ConfigError("train: empty validation split");

    const auto data_dim = static_cast<int>(train_set.items.front().x.cols());
    if (spec.input_dim == 0) spec.input_dim = data_dim;
    if (spec.input_dim != data_dim)
        throw ConfigError("train: spec.input_dim " + std::to_string(spec.input_dim) +
                          " does not match data dimension " + std::to_string(data_dim));
    spec.validate();

    const NormOverride norm = norm_override ? *norm_override : compute_norm(train_set);
    if (norm.input.mean.size() != static_cast<std::size_t>(data_dim) ||
        norm.input.inv_std.size() != static_cast<std::size_t>(data_dim))
        throw ConfigError("train: normalization statistics do not match the input dimension");

    const NormalizedSet tr = normalize_set(train_set, norm);
    const NormalizedSet va = normalize_set(val_set, norm);
    const std::size_t n = tr.x.size();

    Network net(spec);
    AdamState adam(net.params().size());
    const uint64_t dropout_base = substream_seed(config.seed, "dropout");

    Eigen::VectorXd best_params = net.params();
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    std::vector<double> train_losses, val_losses;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    const auto eval_val = [&]() {
        double sum = 0.0;
        for (std::size_t i = 0; i < va.x.size(); ++i)
            sum += 0.5 * (net.forward(va.x[i]) - va.target[i]).squaredNorm();
        return sum / static_cast<double>(va.x.size());
    };

    int epoch = 0;
    for (; epoch < config.max_epochs; ++epoch) {
        double lr = config.lr0;
        if (config.lr_halve_every > 0)
            lr *= std::pow(config.lr_factor, static_cast<double>(epoch / config.lr_halve_every));

        if (config.shuffle) {
            Rng rng(substream_seed(config.seed, "shuffle." + std::to_string(epoch)));
            for (std::size_t i = n; i-- > 1;) {
                const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
                std::swap(order[i], order[std::min(j, i)]);
            }
        }

        double epoch_data_loss = 0.0;
        const auto batch = static_cast<std::size_t>(config.batch);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t count = std::min(batch, n - start);
            const std::size_t chunks = (count + kChunk - 1) / kChunk;
            std::vector<Eigen::VectorXd> grad_slots(chunks);
            std::vector<double> loss_slots(chunks, 0.0);

            const auto run_chunk = [&](std::size_t ci) {
                Eigen::VectorXd sum = Eigen::VectorXd::Zero(net.params().size());
                double loss = 0.0;
                ForwardCache cache;
                const std::size_t lo = start + ci * kChunk;
                const std::size_t hi = std::min(lo + kChunk, start + count);
                for (std::size_t k = lo; k < hi; ++k) {
                    const std::size_t item = order[k];
                    const uint64_t dseed = splitmix64(
                        dropout_base ^ (static_cast<uint64_t>(epoch) * 0x9e3779b97f4a7c15ULL + k));
                    const Eigen::VectorXd y = net.forward_train(tr.x[item], dseed, cache);
                    loss += 0.5 * (y - tr.target[item]).squaredNorm();
                    sum += net.backward(cache, tr.target[item], config.l2_weight);
                }
                grad_slots[ci] = std::move(sum);
                loss_slots[ci] = loss;
            };

            if (config.workers > 1 && chunks > 1) {
                std::atomic<std::size_t> next{0};
                std::vector<std::thread> pool;
                const auto nw = std::min<std::size_t>(static_cast<std::size_t>(config.workers), chunks);
                pool.reserve(nw);
                for (std::size_t w = 0; w < nw; ++w)
                    pool.emplace_back([&] {
                        for (std::size_t ci = next.fetch_add(1); ci < chunks; ci = next.fetch_add(1))
                            run_chunk(ci);
                    });
                for (auto& th : pool) th.join();
            } else {
                for (std::size_t ci = 0; ci < chunks; ++ci) run_chunk(ci);
            }

            Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.params().size());
            for (std::size_t ci = 0; ci < chunks; ++ci) {
                grad += grad_slots[ci];
                epoch_data_loss += loss_slots[ci];
            }
            grad /= static_cast<double>(count);
            adam_step(net.params(), std::move(grad), adam, config, lr);
        }

        train_losses.push_back(epoch_data_loss / static_cast<double>(n) +
                               l2_penalty(net.layout(), net.params(), config.l2_weight));
        const double vl = eval_val();
        val_losses.push_back(vl);

        if (vl < best_val) {
            best_val = vl;
            best_params = net.params();
            best_epoch = epoch;
        } else if (epoch - best_epoch > config.early_stop_patience) {
            ++epoch;
            break;
        }
    }

    Checkpoint ckpt;
    ckpt.spec = spec;
    ckpt.channels = train_set.channels;
    ckpt.window = train_set.window;
    ckpt.stride = train_set.stride;
    ckpt.horizon_s = train_set.horizon_s;
    ckpt.fs = train_set.fs;
    ckpt.output_mode = to_string(train_set.mode);
    ckpt.input_norm = norm.input;
    ckpt.target_mean = norm.target_mean;
    ckpt.target_std = norm.target_std;
    ckpt.meta.epochs_run = epoch;
    ckpt.meta.best_epoch = best_epoch;
    ckpt.meta.best_val_loss = best_val;
    ckpt.meta.train_loss = std::move(train_losses);
    ckpt.meta.val_loss = std::move(val_losses);
    ckpt.meta.seed = config.seed;
    ckpt.weights = std::move(best_params);
    return ckpt;
}

}  // namespace pdrlab::nn

#include "pdrlab/nn/predict.hpp"

#include <cmath>

#include "pdrlab/errors.hpp"
#include "pdrlab/nn/network.hpp"
#include "pdrlab/rng.hpp"
#include "pdrlab/streams/windows.hpp"

namespace pdrlab::nn {

namespace {

// Mean/variance of de-normalized outputs over MC passes (or one plain
// forward when passes == 0).
struct McResult {
    Eigen::Vector2d mean;
    Eigen::Vector2d var;
    bool degenerate = false;
};

McResult mc_eval(const Network& net, const Checkpoint& ckpt, const Eigen::MatrixXd& x_norm,
                 int passes, uint64_t seed) {
    McResult out{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), false};
    // Without dropout every pass is identical: variance is exactly zero.
    if (passes <= 0 || ckpt.spec.dropout_rate == 0.0) {
        out.mean = ckpt.denormalize(net.forward(x_norm));
        return out;
    }
    std::vector<Eigen::Vector2d> ys;
    ys.reserve(static_cast<std::size_t>(passes));
    ForwardCache cache;
    for (int k = 0; k < passes; ++k) {
        const uint64_t pass_seed = splitmix64(substream_seed(seed, "mc") + static_cast<uint64_t>(k));
        ys.push_back(ckpt.denormalize(net.forward_train(x_norm, pass_seed, cache)));
    }
    for (const auto& y : ys) out.mean += y;
    out.mean /= static_cast<double>(passes);
    if (passes == 1) {
        out.degenerate = true;
        return out;
    }
    for (const auto& y : ys) out.var += (y - out.mean).cwiseProduct(y - out.mean);
    out.var /= static_cast<double>(passes - 1);
    return out;
}

}  // namespace

PoseEstimate mc_dropout_predict(const Eigen::MatrixXd& x_raw, const Checkpoint& ckpt, int passes,
                                uint64_t seed, double t_target, double horizon) {
    if (passes < 1) throw ConfigError("mc_dropout_predict: passes must be >= 1");
    Network net(ckpt.spec, ckpt.weights);
    Eigen::MatrixXd x = x_raw;
    ckpt.normalize(x);
    const McResult r = mc_eval(net, ckpt, x, passes, seed);
    return {t_target, r.mean(0), r.mean(1), r.var(0), r.var(1), horizon, r.degenerate};
}

std::vector<PoseEstimate> predict_trajectory(const streams::Segment& segment_in,
                                             const Checkpoint& ckpt,
                                             const PredictOptions& opts) {
    if (std::abs(segment_in.fs - ckpt.fs) > 1e-9)
        throw ConfigError("predict_trajectory: segment rate does not match the checkpoint");
    for (const auto& name : ckpt.channels) segment_in.require(name);
    if (opts.mc_passes < 0) throw ConfigError("predict_trajectory: mc_passes must be >= 0");

    const OutputMode mode = output_mode_from_string(ckpt.output_mode);
    const bool delta = mode == OutputMode::delta;
    const streams::Segment segment = delta ? streams::position_deltas(segment_in) : segment_in;

    const auto stride = static_cast<std::size_t>(delta ? ckpt.stride : std::max(1, opts.stride_ticks));
    const double overlap = 1.0 - static_cast<double>(stride) / static_cast<double>(ckpt.window);
    const auto windows = streams::make_windows(segment, static_cast<std::size_t>(ckpt.window),
                                               overlap, ckpt.horizon_s);

    Network net(ckpt.spec, ckpt.weights);
    std::vector<PoseEstimate> out;
    out.reserve(windows.size());

    // Delta-mode chaining state.
    bool have_start = false;
    Eigen::Vector2d pos = Eigen::Vector2d::Zero();
    Eigen::Vector2d var_acc = Eigen::Vector2d::Zero();

    for (const auto& w : windows) {
        Eigen::MatrixXd x = streams::extract_inputs(segment, w, ckpt.channels);
        Eigen::Vector2d anchor = Eigen::Vector2d::Zero();
        if (!delta) {
            anchor = window_anchor(segment, w);
            center_position_inputs(x, segment, w, ckpt.channels, anchor);
        }
        ckpt.normalize(x);
        const McResult r = mc_eval(net, ckpt, x, opts.mc_passes, opts.mc_seed);
        const double t_target = segment.time_at(w.target_tick);

        if (!delta) {
            out.push_back({t_target, anchor(0) + r.mean(0), anchor(1) + r.mean(1), r.var(0), r.var(1),
                           ckpt.horizon_s, r.degenerate});
            continue;
        }

        if (!have_start) {
            const std::size_t anchor = w.target_tick >= stride ? w.target_tick - stride : 0;
            if (segment_in.has_ref()) {
                pos = {segment_in.ref[anchor].x, segment_in.ref[anchor].y};
            } else {
                // Nearest valid radio fix at or before the anchor.
                const auto& radio = segment_in.require("p_radio");
                std::size_t k = anchor + 1;
                while (k-- > 0)
                    if (radio.valid(k)) break;
                if (k == static_cast<std::size_t>(-1))
                    throw DataError("predict_trajectory: no radio fix available for the delta start position");
                pos = {radio.at(k, 0), radio.at(k, 1)};
            }
            have_start = true;
        }
        pos += r.mean;
        var_acc += r.var;  // first-order: per-step delta variances accumulate
        out.push_back({t_target, pos(0), pos(1), var_acc(0), var_acc(1), ckpt.horizon_s, r.degenerate});
    }
    return out;
}

}  // namespace pdrlab::nn

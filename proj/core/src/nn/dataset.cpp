#include "pdrlab/nn/dataset.hpp"

#include <algorithm>

#include "pdrlab/errors.hpp"
#include "pdrlab/rng.hpp"

namespace pdrlab::nn {

const char* to_string(OutputMode m) { return m == OutputMode::absolute ? "absolute" : "delta"; }

OutputMode output_mode_from_string(const std::string& s) {
    if (s == "absolute") return OutputMode::absolute;
    if (s == "delta") return OutputMode::delta;
    throw ConfigError("unknown output mode: " + s);
}

Eigen::Vector2d window_anchor(const streams::Segment& segment, const streams::WindowBundle& window) {
    const auto* radio = segment.find("p_radio");
    if (!radio) return Eigen::Vector2d::Zero();
    std::size_t k = window.start_tick + window.length;
    while (k-- > window.start_tick)
        if (radio->valid(k)) return {radio->at(k, 0), radio->at(k, 1)};
    return Eigen::Vector2d::Zero();
}

void center_position_inputs(Eigen::MatrixXd& x,
                            const streams::Segment& segment,
                            const streams::WindowBundle& window,
                            std::span<const std::string> channels,
                            const Eigen::Vector2d& anchor) {
    int col = 0;
    for (const auto& name : channels) {
        const auto& c = segment.require(name);
        if (name == "p_radio") {
            for (std::size_t r = 0; r < window.length; ++r) {
                if (!c.valid(window.start_tick + r)) continue;  // imputed zeros stay zero
                x(static_cast<Eigen::Index>(r), col) -= anchor(0);
                x(static_cast<Eigen::Index>(r), col + 1) -= anchor(1);
            }
            return;
        }
        col += c.dim;
    }
}

WindowDataset build_dataset(std::span<const streams::Segment> segments,
                            std::span<const std::string> channels,
                            int n_w,
                            double overlap,
                            double horizon_s,
                            OutputMode mode) {
    if (segments.empty()) throw ConfigError("build_dataset: no segments");
    if (channels.empty()) throw ConfigError("build_dataset: no input channels");

    WindowDataset ds;
    ds.channels.assign(channels.begin(), channels.end());
    ds.window = n_w;
    ds.stride = static_cast<int>(streams::window_stride(static_cast<std::size_t>(n_w), overlap));
    ds.mask_cols = static_cast<int>(channels.size());
    ds.horizon_s = horizon_s;
    ds.fs = segments.front().fs;
    ds.mode = mode;

    for (const auto& seg_in : segments) {
        if (!seg_in.has_ref()) throw DataError("build_dataset: segment '" + seg_in.id + "' has no reference");
        if (seg_in.fs != ds.fs) throw ConfigError("build_dataset: segments disagree on fs");

        const streams::Segment seg =
            mode == OutputMode::delta ? streams::position_deltas(seg_in) : seg_in;
        const auto windows = streams::make_windows(seg, static_cast<std::size_t>(n_w), overlap, horizon_s);

        for (const auto& w : windows) {
            TrainWindow tw;
            tw.x = streams::extract_inputs(seg, w, channels);
            tw.t_target = w.target.t;
            if (mode == OutputMode::absolute) {
                tw.anchor = window_anchor(seg, w);
                center_position_inputs(tw.x, seg, w, channels, tw.anchor);
                tw.target = Eigen::Vector2d(w.target.x, w.target.y) - tw.anchor;
            } else {
                // Directed distance from the previous target tick. The first
                // window anchors at tick 0 when a full stride is not
                // available behind it.
                const std::size_t anchor =
                    w.target_tick >= static_cast<std::size_t>(ds.stride)
                        ? w.target_tick - static_cast<std::size_t>(ds.stride)
                        : 0;
                const ReferencePose& a = seg.ref[anchor];
                tw.target = {w.target.x - a.x, w.target.y - a.y};
            }
            ds.items.push_back(std::move(tw));
        }
    }
    return ds;
}

std::pair<WindowDataset, WindowDataset> split_dataset(const WindowDataset& ds, double val_fraction,
                                                      uint64_t seed) {
    if (val_fraction <= 0.0 || val_fraction >= 1.0)
        throw ConfigError("split_dataset: val_fraction must be in (0, 1)");
    if (ds.items.size() < 2) throw ConfigError("split_dataset: need at least 2 windows");

    const std::size_t n = ds.items.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(substream_seed(seed, "split"));
    for (std::size_t i = n; i-- > 1;) {
        const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
        std::swap(idx[i], idx[std::min(j, i)]);
    }

    const std::size_t n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(
                                                            val_fraction * static_cast<double>(n))));
    std::vector<bool> is_val(n, false);
    for (std::size_t i = 0; i < std::min(n_val, n - 1); ++i) is_val[idx[i]] = true;

    WindowDataset train = ds, val = ds;
    train.items.clear();
    val.items.clear();
    for (std::size_t i = 0; i < n; ++i) (is_val[i] ? val : train).items.push_back(ds.items[i]);
    return {std::move(train), std::move(val)};
}

}  // namespace pdrlab::nn

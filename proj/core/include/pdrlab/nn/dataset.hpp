#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pdrlab/streams/segment.hpp"
#include "pdrlab/streams/windows.hpp"

namespace pdrlab::nn {

enum class OutputMode { absolute, delta };

const char* to_string(OutputMode m);
OutputMode output_mode_from_string(const std::string& s);

/// One training example: a raw (unnormalized) input window and its target in
/// meters. In absolute mode the target is the pose at the window's target
/// tick; in delta mode it is the directed distance from the previous target
/// tick (one stride back), and the input position channel is delta-encoded.
///
/// Absolute-mode windows are anchored: the position columns and the target
/// are expressed relative to the window's last valid radio fix, and the
/// anchor is added back at prediction time. This keeps the regression range
/// window-local instead of arena-wide (the anchor's noise cancels in the
/// sum), which the small desk-scale networks need to train well.
struct TrainWindow {
    Eigen::MatrixXd x;
    Eigen::Vector2d target;
    Eigen::Vector2d anchor = Eigen::Vector2d::Zero();
    double t_target = 0.0;
};

/// Last valid radio position at or before the window end (zero when the
/// channel is absent or never valid inside the window).
Eigen::Vector2d window_anchor(const streams::Segment& segment, const streams::WindowBundle& window);

/// Subtract the anchor from the p_radio columns of an extracted input matrix
/// (masked ticks stay zero).
void center_position_inputs(Eigen::MatrixXd& x,
                            const streams::Segment& segment,
                            const streams::WindowBundle& window,
                            std::span<const std::string> channels,
                            const Eigen::Vector2d& anchor);

struct WindowDataset {
    std::vector<TrainWindow> items;
    std::vector<std::string> channels;
    int window = 128;
    int stride = 64;
    int mask_cols = 0;  // trailing validity-mask columns of each x
    double horizon_s = 0.0;
    double fs = 100.0;
    OutputMode mode = OutputMode::absolute;
};

/// Build training windows from reference-carrying segments.
WindowDataset build_dataset(std::span<const streams::Segment> segments,
                            std::span<const std::string> channels,
                            int n_w,
                            double overlap,
                            double horizon_s,
                            OutputMode mode);

/// Deterministic shuffled split; both halves keep their original relative
/// order. val_fraction of the items (at least 1) goes to the second half.
std::pair<WindowDataset, WindowDataset> split_dataset(const WindowDataset& ds, double val_fraction,
                                                      uint64_t seed);

}  // namespace pdrlab::nn

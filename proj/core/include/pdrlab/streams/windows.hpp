#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string>
#include <vector>

#include "pdrlab/streams/segment.hpp"

namespace pdrlab::streams {

/// A fixed-length slice of a segment plus its target pose at a forecast
/// horizon. The slice covers ticks [start_tick, start_tick + length); the
/// target sits at tick start_tick + length - 1 + round(horizon * fs).
struct WindowBundle {
    std::string segment_id;
    std::size_t start_tick = 0;
    std::size_t length = 0;
    double horizon_s = 0.0;
    std::size_t target_tick = 0;
    ReferencePose target;     // filled when the segment carries a reference
    bool has_target = false;
};

/// stride = max(1, round(n_w * (1 - overlap))).
std::size_t window_stride(std::size_t n_w, double overlap);

/// Slide windows across the segment. Emits
/// floor((L - N_w - h_ticks)/stride) + 1 windows when that count is
/// non-negative, none otherwise (short segments are not an error).
std::vector<WindowBundle> make_windows(const Segment& segment,
                                       std::size_t n_w,
                                       double overlap,
                                       double horizon_s);

/// Replace the radio-position channel by per-tick directed deltas
/// (first tick = zero vector).
Segment position_deltas(const Segment& segment);

/// Inverse of position_deltas: cumulative sum from a start position.
Segment undo_position_deltas(const Segment& segment, std::array<double, 2> start);

/// Window input matrix (length x (sum of channel dims + one validity-mask
/// column per channel)). Invalid ticks are zero-imputed; the mask column is
/// 1 where the channel is valid.
Eigen::MatrixXd extract_inputs(const Segment& segment,
                               const WindowBundle& window,
                               std::span<const std::string> channels);

/// Column labels matching extract_inputs' layout.
std::vector<std::string> input_column_names(const Segment& segment, std::span<const std::string> channels);

/// Input matrix width for a channel selection.
int input_dim(const Segment& segment, std::span<const std::string> channels);

}  // namespace pdrlab::streams

#pragma once

#include <cstdint>
#include <vector>

#include "pdrlab/nn/checkpoint.hpp"
#include "pdrlab/nn/dataset.hpp"
#include "pdrlab/streams/segment.hpp"
#include "pdrlab/types.hpp"

namespace pdrlab::nn {

/// Monte-Carlo dropout prediction on a raw input window: `passes` forward
/// passes with dropout active and distinct mask seeds; mean and per-axis
/// sample variance of the de-normalized outputs. A single pass yields zero
/// variance and sets the degenerate flag.
PoseEstimate mc_dropout_predict(const Eigen::MatrixXd& x_raw,
                                const Checkpoint& ckpt,
                                int passes,
                                uint64_t seed,
                                double t_target = 0.0,
                                double horizon = 0.0);

struct PredictOptions {
    int stride_ticks = 1;  // delta mode always uses the checkpoint's training stride
    int mc_passes = 0;     // 0 = plain inference, variance 0
    uint64_t mc_seed = 1;
};

/// Slide the checkpoint's window across a segment and emit one pose estimate
/// per window at the trained horizon. Absolute mode outputs poses directly;
/// delta mode accumulates predicted directed distances from a start position
/// (reference pose at the first anchor tick when attached, otherwise the
/// nearest valid radio fix).
std::vector<PoseEstimate> predict_trajectory(const streams::Segment& segment,
                                             const Checkpoint& ckpt,
                                             const PredictOptions& opts = {});

}  // namespace pdrlab::nn

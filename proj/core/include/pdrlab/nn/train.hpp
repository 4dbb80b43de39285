#pragma once

#include <optional>

#include "pdrlab/nn/checkpoint.hpp"
#include "pdrlab/nn/dataset.hpp"
#include "pdrlab/nn/network.hpp"

namespace pdrlab::nn {

/// Preset normalization, e.g. for fine-tuning or for feeding pre-normalized
/// data with identity statistics. When absent the statistics are computed
/// from the training split.
struct NormOverride {
    InputNorm input;
    std::array<double, 2> target_mean{0.0, 0.0};
    std::array<double, 2> target_std{1.0, 1.0};
};

/// Mini-batch Adam training with per-epoch shuffling, stepwise learning-rate
/// halving, early stopping on validation loss and best-validation checkpoint
/// selection. Deterministic for fixed (data, spec, config): batch gradients
/// are accumulated in fixed chunk order independent of the worker count.
///
/// spec.input_dim of 0 is filled in from the data.
Checkpoint train(const WindowDataset& train_set,
                 const WindowDataset& val_set,
                 NetworkSpec spec,
                 const TrainConfig& config,
                 const std::optional<NormOverride>& norm = std::nullopt);

}  // namespace pdrlab::nn

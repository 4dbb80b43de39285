#pragma once

#include <cstdint>
#include <vector>

namespace pdrlab::nn {

/// Architecture: feed-forward layer(s) -> stacked LSTM -> dropout -> feed-
/// forward head. Defaults are the full-scale configuration (120 cells,
/// dropout 0.5 after the LSTM stack, one FF before and one after);
/// desk_scale() shrinks it for CI-sized runs.
struct NetworkSpec {
    int input_dim = 0;
    std::vector<int> ff_in_dims{64};
    int lstm_layers = 1;
    int lstm_cells = 120;
    double dropout_rate = 0.5;
    std::vector<int> ff_out_dims{2};  // last entry is the output dimension
    uint64_t init_seed = 1;

    int output_dim() const { return ff_out_dims.empty() ? 0 : ff_out_dims.back(); }

    static NetworkSpec desk_scale(int input_dim);

    void validate() const;
};

/// Adam training schedule. Defaults: lr 0.001 halved every lr_halve_every
/// epochs, batch 1024, at most 100 epochs with early stopping, per-epoch
/// shuffle, L2 regularization, global-norm gradient clipping.
struct TrainConfig {
    double lr0 = 1e-3;
    double beta1 = 0.9;  // 0.01 is selectable for comparison runs
    double beta2 = 0.999;
    double eps = 1e-8;
    int lr_halve_every = 50;  // epochs; 0 disables the schedule
    double lr_factor = 0.5;
    int batch = 1024;
    int max_epochs = 100;
    int early_stop_patience = 10;
    double l2_weight = 1e-5;
    double grad_clip = 1.0;  // max global norm; 0 disables
    bool shuffle = true;
    uint64_t seed = 1;
    int workers = 1;

    static TrainConfig desk_scale();

    void validate() const;
};

}  // namespace pdrlab::nn

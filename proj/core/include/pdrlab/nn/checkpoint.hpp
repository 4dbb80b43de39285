#pragma once

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "pdrlab/nn/spec.hpp"

namespace pdrlab::nn {

/// Per-column affine input normalization: column j of a raw window maps to
/// (x - mean[j]) * inv_std[j]. Validity-mask columns keep identity stats.
struct InputNorm {
    std::vector<double> mean;
    std::vector<double> inv_std;
};

struct TrainMeta {
    int epochs_run = 0;
    int best_epoch = -1;
    double best_val_loss = 0.0;
    std::vector<double> train_loss;  // per epoch, normalized space
    std::vector<double> val_loss;
    uint64_t seed = 0;
};

/// Versioned serialized model: architecture, input/target normalization,
/// window geometry, training metadata and the flat weight vector. The file
/// layout is a magic string, a JSON header and a little-endian float64 blob
/// in the deterministic parameter-layout order; save/load round-trips are
/// bitwise exact.
struct Checkpoint {
    int format_version = 1;
    NetworkSpec spec;
    std::vector<std::string> channels;  // segment channels the model consumes
    int window = 128;                   // ticks
    int stride = 64;                    // training window stride, ticks
    double horizon_s = 0.0;
    double fs = 100.0;
    std::string output_mode = "absolute";  // or "delta"
    InputNorm input_norm;
    std::array<double, 2> target_mean{0.0, 0.0};
    std::array<double, 2> target_std{1.0, 1.0};
    TrainMeta meta;
    Eigen::VectorXd weights;

    void save(const std::filesystem::path& path) const;
    static Checkpoint load(const std::filesystem::path& path);

    /// Normalize a raw input window in place.
    void normalize(Eigen::MatrixXd& x) const;
    /// Map a normalized network output back to meters.
    Eigen::Vector2d denormalize(const Eigen::VectorXd& y) const;
    Eigen::Vector2d normalize_target(const Eigen::Vector2d& t) const;
};

}  // namespace pdrlab::nn

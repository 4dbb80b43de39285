#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pdrlab/eval/experiments.hpp"
#include "pdrlab/kalman/tune.hpp"
#include "pdrlab/nn/spec.hpp"
#include "pdrlab/sim/profile.hpp"
#include "pdrlab/streams/synchronize.hpp"

namespace pdrlab {

/// One JSON document configuring the whole pipeline: activity profiles,
/// sensor noise, pipeline geometry, estimator settings and the experiment
/// design. Validated against a versioned schema; unknown keys are rejected
/// and any *_path / *_file entry must point at an existing file.
struct ScenarioConfig {
    int version = 1;
    uint64_t seed = 1;
    std::string out_dir = "out";

    std::vector<sim::ActivityProfile> activities;  // defaults to one walking profile
    sim::SensorNoiseSpec noise;

    struct Pipeline {
        double fs = 100.0;
        int window = 128;
        double overlap = 0.5;
        double horizon_s = 0.0;
        streams::SyncPolicy policy = streams::SyncPolicy::offline;
        double madgwick_beta = 0.1;
    } pipeline;

    struct Classic {
        std::string theta_source = "ori";  // ori | radio | ref
        double recal_interval_s = 30.0;    // <= 0: no recalibration
        std::string rho_mode = "tick";     // tick | window
    } classic;

    struct Kalman {
        kalman::KfConfig config;
        double horizon_s = 0.0;
        kalman::TuneGrid tune_grid;
        bool accel_as_control = false;
    } kalman;

    nn::NetworkSpec network;
    std::string network_checkpoint_path;  // optional default for predict
    nn::TrainConfig training;
    std::vector<std::string> input_channels{"p_radio", "v"};
    std::string output_mode = "absolute";

    struct Experiment {
        std::string design = "recal";  // inputs | forecast | recal | activity
        int seeds = 5;
        eval::ExperimentScenario scenario;
        std::vector<std::vector<std::string>> input_sets{{"p_radio", "v"}, {"p_radio", "acc"}};
        std::vector<double> horizons_s{0.0, 1.0, 2.0};
        std::vector<int> window_lengths{64, 128, 256};
        std::vector<double> intervals_s{1.0, 30.0, 100.0, 0.0};  // 0 = none (pure)
        std::vector<std::string> estimators{"classic", "kf", "pdrnn"};
    } experiment;

    static ScenarioConfig load_file(const std::filesystem::path& path);
    static ScenarioConfig parse(const std::string& text, const std::filesystem::path& base_dir = ".");

    /// Hash of the canonicalized (key-sorted, whitespace-free) document.
    const std::string& hash() const { return hash_; }

private:
    std::string hash_;
};

}  // namespace pdrlab

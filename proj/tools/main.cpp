// pdrlab command-line tool: simulation, preprocessing, estimators,
// evaluation and scripted experiments, with per-stage provenance manifests.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "pdrlab/config.hpp"
#include "pdrlab/eval/experiments.hpp"
#include "pdrlab/eval/metrics.hpp"
#include "pdrlab/io/csv.hpp"
#include "pdrlab/io/manifest.hpp"
#include "pdrlab/kalman/filter.hpp"
#include "pdrlab/kalman/tune.hpp"
#include "pdrlab/nn/predict.hpp"
#include "pdrlab/nn/train.hpp"
#include "pdrlab/rng.hpp"
#include "pdrlab/sim/reference.hpp"
#include "pdrlab/sim/sensors.hpp"
#include "pdrlab/streams/jsonl.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace pdrlab;

namespace {

constexpr const char* kToolVersion = "pdrlab 0.1.0";
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumeric = 3;

struct GlobalOpts {
    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;  // 0 = from config
    bool verify = false;
};

ScenarioConfig load_config(const GlobalOpts& g) {
    ScenarioConfig cfg;
    if (!g.config_path.empty()) {
        cfg = ScenarioConfig::load_file(g.config_path);
    } else {
        cfg = ScenarioConfig::parse(R"({"version": 1})");
    }
    if (g.seed_set) cfg.seed = g.seed;
    if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
    if (g.workers > 0) cfg.experiment.scenario.workers = g.workers;
    return cfg;
}

void require_input(const fs::path& path) {
    if (!fs::exists(path)) throw IoError("missing upstream artifact, expected: " + path.string());
}

fs::path ensure_out_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError("cannot create output directory: " + p.string());
    return p;
}

// Stage bookkeeping: records inputs/outputs, writes manifest.json, and
// optionally re-verifies the written artifacts.
struct Stage {
    io::Manifest manifest;
    fs::path out_dir;
    bool verify = false;

    Stage(const std::string& name, const ScenarioConfig& cfg, const GlobalOpts& g,
          const std::vector<std::string>& args) {
        manifest.stage = name;
        manifest.tool_version = kToolVersion;
        manifest.config_hash = cfg.hash();
        manifest.seed = cfg.seed;
        manifest.args = args;
        out_dir = ensure_out_dir(cfg.out_dir);
        verify = g.verify;
    }

    void add_input(const fs::path& path) {
        manifest.inputs[path.generic_string()] = io::sha256_file(path);
    }
    void add_output(const fs::path& path) {
        manifest.outputs[fs::relative(path, out_dir).generic_string()] = io::sha256_file(path);
    }

    void finish() {
        manifest.save(out_dir / "manifest.json");
        if (verify) {
            if (auto err = io::verify_outputs(manifest, out_dir))
                throw NumericError("post-write verification failed: " + *err);
            std::cout << "verify: all " << manifest.outputs.size() << " artifacts match\n";
        }
    }
};

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "radio_pos") item = "p_radio";  // stream-modality aliases
        else if (item == "speed") item = "v";
        else if (item == "accel") item = "acc";
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string config_comment(const ScenarioConfig& cfg) { return "config=" + cfg.hash(); }

// ---- simulate --------------------------------------------------------------

int cmd_simulate(const GlobalOpts& g, const std::vector<std::string>& args) {
    const auto cfg = load_config(g);
    Stage stage("simulate", cfg, g, args);
    if (!g.config_path.empty()) stage.add_input(g.config_path);

    for (std::size_t i = 0; i < cfg.activities.size(); ++i) {
        const auto& profile = cfg.activities[i];
        const uint64_t subject_seed = cfg.seed + i;
        char name[64];
        std::snprintf(name, sizeof(name), "subject_%03zu_%s", i, sim::to_string(profile.kind));
        const fs::path dir = stage.out_dir / name;
        ensure_out_dir(dir.string());

        const auto ref = sim::generate_reference(profile, subject_seed, 0.01);
        auto radio = sim::sample_radio(ref, cfg.noise, subject_seed);
        const auto imu = sim::sample_imu(ref, cfg.noise, subject_seed);

        std::vector<SensorSample> merged = std::move(radio);
        merged.insert(merged.end(), imu.begin(), imu.end());
        std::stable_sort(merged.begin(), merged.end(),
                         [](const SensorSample& a, const SensorSample& b) { return a.t_meas < b.t_meas; });

        streams::write_jsonl(dir / "streams.jsonl", merged);
        io::write_reference_csv(dir / "reference.csv", ref, config_comment(cfg));
        stage.add_output(dir / "streams.jsonl");
        stage.add_output(dir / "reference.csv");

        std::cout << name << ": " << ref.size() << " reference poses, " << merged.size()
                  << " samples\n";
    }
    stage.finish();
    return 0;
}

// ---- pipeline --------------------------------------------------------------

int cmd_pipeline(const GlobalOpts& g, const std::vector<std::string>& args, const std::string& in_dir) {
    const auto cfg = load_config(g);
    Stage stage("pipeline", cfg, g, args);

    const fs::path in(in_dir);
    require_input(in);
    std::vector<fs::path> subjects;
    for (const auto& e : fs::directory_iterator(in))
        if (e.is_directory() && fs::exists(e.path() / "streams.jsonl")) subjects.push_back(e.path());
    std::sort(subjects.begin(), subjects.end());
    if (subjects.empty()) require_input(in / "subject_000_walking" / "streams.jsonl");

    for (const auto& dir : subjects) {
        const fs::path streams_file = dir / "streams.jsonl";
        const fs::path ref_file = dir / "reference.csv";
        require_input(streams_file);
        stage.add_input(streams_file);

        const auto samples = streams::read_jsonl(streams_file);
        streams::SyncOptions opts;
        opts.fs = cfg.pipeline.fs;
        opts.policy = cfg.pipeline.policy;
        opts.madgwick_beta = cfg.pipeline.madgwick_beta;
        opts.segment_id = dir.filename().string();
        std::vector<std::vector<SensorSample>> stream_set{samples};
        auto segment = streams::synchronize(stream_set, opts);

        if (fs::exists(ref_file)) {
            stage.add_input(ref_file);
            const auto ref = io::read_reference_csv(ref_file);
            streams::attach_reference(segment, ref);
        }

        const fs::path out_file = stage.out_dir / (dir.filename().string() + "_segment.csv");
        io::write_segment_csv(out_file, segment, config_comment(cfg));
        stage.add_output(out_file);
        std::cout << out_file.filename().string() << ": " << segment.ticks << " ticks at "
                  << segment.fs << " Hz\n";
    }

    ordered_json meta;
    meta["fs_hz"] = cfg.pipeline.fs;
    meta["window"] = cfg.pipeline.window;
    meta["overlap"] = cfg.pipeline.overlap;
    meta["horizon_s"] = cfg.pipeline.horizon_s;
    meta["policy"] = cfg.pipeline.policy == streams::SyncPolicy::offline ? "offline" : "realtime";
    std::ofstream os(stage.out_dir / "pipeline.json");
    os << meta.dump(2) << '\n';
    os.close();
    stage.add_output(stage.out_dir / "pipeline.json");
    stage.finish();
    return 0;
}

// ---- reconstruct -----------------------------------------------------------

int cmd_reconstruct(const GlobalOpts& g, const std::vector<std::string>& args,
                    const std::string& segment_file, const std::string& theta_source,
                    double recal_interval, const std::string& rho_mode) {
    auto cfg = load_config(g);
    if (!theta_source.empty()) cfg.classic.theta_source = theta_source;
    if (recal_interval >= 0.0) cfg.classic.recal_interval_s = recal_interval;
    if (!rho_mode.empty()) cfg.classic.rho_mode = rho_mode;

    Stage stage("reconstruct", cfg, g, args);
    require_input(segment_file);
    stage.add_input(segment_file);
    const auto segment = io::read_segment_csv(segment_file);

    const auto& v = segment.require("v");
    const streams::Channel* theta_ch = nullptr;
    std::vector<double> theta_ref;
    if (cfg.classic.theta_source == "ori") theta_ch = &segment.require("theta_ori");
    else if (cfg.classic.theta_source == "radio") theta_ch = &segment.require("theta_radio");
    else {
        if (!segment.has_ref()) throw DataError("theta-source ref requires a reference-carrying segment");
        theta_ref.resize(segment.ticks);
        for (std::size_t k = 0; k < segment.ticks; ++k) theta_ref[k] = segment.ref[k].heading;
    }

    const std::size_t stride =
        cfg.classic.rho_mode == "window"
            ? streams::window_stride(static_cast<std::size_t>(cfg.pipeline.window), cfg.pipeline.overlap)
            : 1;
    const double dt = static_cast<double>(stride) / segment.fs;

    std::vector<double> rho, theta, times;
    double last_theta = 0.0;
    for (std::size_t k = 0; k + stride < segment.ticks + 1 && k + 1 < segment.ticks; k += stride) {
        rho.push_back((v.valid(k) ? std::max(0.0, v.at(k)) : 0.0) * dt);
        if (theta_ch) {
            if (theta_ch->valid(k)) last_theta = theta_ch->at(k);
        } else {
            last_theta = theta_ref[k];
        }
        theta.push_back(last_theta);
        times.push_back(segment.time_at(std::min(segment.ticks - 1, k + stride)));
    }

    // Position fixes from observed radio ticks nearest the schedule.
    std::vector<classic::RecalFix> fixes;
    const auto& radio = segment.require("p_radio");
    std::array<double, 2> p0{0.0, 0.0};
    bool have_p0 = false;
    for (std::size_t k = 0; k < segment.ticks && !have_p0; ++k)
        if (radio.validity[k] == streams::Validity::observed || radio.valid(k)) {
            p0 = {radio.at(k, 0), radio.at(k, 1)};
            have_p0 = true;
        }
    if (cfg.classic.recal_interval_s > 0.0) {
        for (double ts = segment.t0 + cfg.classic.recal_interval_s;
             ts <= segment.time_at(segment.ticks - 1) + 1e-9; ts += cfg.classic.recal_interval_s) {
            const auto tick = static_cast<std::size_t>(std::llround((ts - segment.t0) * segment.fs));
            for (std::size_t k = std::min(tick, segment.ticks - 1); k < segment.ticks; ++k)
                if (radio.valid(k)) {
                    fixes.push_back({segment.time_at(k), radio.at(k, 0), radio.at(k, 1)});
                    break;
                }
        }
    }

    const auto res = classic::reconstruct(p0, segment.t0, rho, theta, times, fixes);
    if (res.ignored_fixes > 0)
        std::cerr << "warning: " << res.ignored_fixes << " recalibration fixes outside the trajectory span\n";

    const fs::path out_file = stage.out_dir / "trajectory.csv";
    io::write_trajectory_csv(out_file, res.trajectory, config_comment(cfg));
    stage.add_output(out_file);
    stage.finish();
    std::cout << "trajectory.csv: " << res.trajectory.size() << " poses\n";
    return 0;
}

// ---- kf --------------------------------------------------------------------

int cmd_kf_run(const GlobalOpts& g, const std::vector<std::string>& args,
               const std::vector<std::string>& stream_files, double q0, double r_pos, double r_vel,
               double horizon, double fs_out) {
    auto cfg = load_config(g);
    if (q0 > 0) cfg.kalman.config.q0 = q0;
    if (r_pos > 0) cfg.kalman.config.r_pos = r_pos;
    if (r_vel > 0) cfg.kalman.config.r_vel = r_vel;
    if (horizon >= 0) cfg.kalman.horizon_s = horizon;

    Stage stage("kf", cfg, g, args);
    std::vector<SensorSample> merged;
    for (const auto& f : stream_files) {
        require_input(f);
        stage.add_input(f);
        const auto s = streams::read_jsonl(f);
        merged.insert(merged.end(), s.begin(), s.end());
    }

    kalman::KfRunOptions opts;
    opts.fs_out = fs_out > 0 ? fs_out : cfg.pipeline.fs;
    opts.horizon = cfg.kalman.horizon_s;
    opts.accel_as_control = cfg.kalman.accel_as_control;
    kalman::KfRunStats stats;
    const auto est = kalman::kf_run(merged, cfg.kalman.config, opts, &stats);

    const fs::path out_file = stage.out_dir / "kf_estimates.csv";
    io::write_estimates_csv(out_file, est, config_comment(cfg));
    stage.add_output(out_file);
    stage.finish();
    std::cout << "kf_estimates.csv: " << est.size() << " estimates, " << stats.position_updates
              << " position updates, " << stats.velocity_updates << " velocity updates, "
              << stats.rejected_updates << " rejected\n";
    return 0;
}

int cmd_kf_tune(const GlobalOpts& g, const std::vector<std::string>& args) {
    const auto cfg = load_config(g);
    Stage stage("kf-tune", cfg, g, args);
    if (cfg.kalman.tune_grid.q0.empty() || cfg.kalman.tune_grid.r.empty())
        throw ConfigError("kf tune requires kalman.tune_grid.q0 and .r in the config");

    // Tuning data straight from the configured scenario.
    std::vector<kalman::TuneCase> cases;
    for (std::size_t i = 0; i < cfg.activities.size(); ++i) {
        kalman::TuneCase tc;
        tc.ref = sim::generate_reference(cfg.activities[i], cfg.seed + i, 0.01);
        auto radio = sim::sample_radio(tc.ref, cfg.noise, cfg.seed + i);
        const auto imu = sim::sample_imu(tc.ref, cfg.noise, cfg.seed + i);
        tc.samples = std::move(radio);
        tc.samples.insert(tc.samples.end(), imu.begin(), imu.end());
        cases.push_back(std::move(tc));
    }

    const auto best = kalman::kf_tune(cases, cfg.kalman.tune_grid, cfg.pipeline.fs);
    ordered_json j;
    j["q0"] = best.q0;
    j["r_pos"] = best.r_pos;
    j["r_vel"] = best.r_vel;
    j["p0"] = best.p0;
    const fs::path out_file = stage.out_dir / "kf_config.json";
    std::ofstream os(out_file);
    os << j.dump(2) << '\n';
    os.close();
    stage.add_output(out_file);
    stage.finish();
    std::cout << j.dump() << '\n';
    return 0;
}

// ---- train / predict -------------------------------------------------------

int cmd_train(const GlobalOpts& g, const std::vector<std::string>& args,
              const std::vector<std::string>& segment_files, const std::string& inputs_csv,
              int window, double overlap, double horizon, const std::string& mode,
              double val_fraction, bool desk) {
    auto cfg = load_config(g);
    if (window > 0) cfg.pipeline.window = window;
    if (overlap >= 0) cfg.pipeline.overlap = overlap;
    if (horizon >= 0) cfg.pipeline.horizon_s = horizon;
    if (!mode.empty()) cfg.output_mode = mode;
    if (!inputs_csv.empty()) cfg.input_channels = split_list(inputs_csv);

    Stage stage("train", cfg, g, args);
    std::vector<streams::Segment> segments;
    for (const auto& f : segment_files) {
        require_input(f);
        stage.add_input(f);
        segments.push_back(io::read_segment_csv(f));
    }

    auto ds = nn::build_dataset(segments, cfg.input_channels, cfg.pipeline.window, cfg.pipeline.overlap,
                                cfg.pipeline.horizon_s, nn::output_mode_from_string(cfg.output_mode));
    auto [tr, va] = nn::split_dataset(ds, val_fraction, cfg.seed);

    nn::NetworkSpec spec = desk ? nn::NetworkSpec::desk_scale(0) : cfg.network;
    spec.input_dim = 0;
    spec.init_seed = cfg.seed;
    nn::TrainConfig tc = desk ? nn::TrainConfig::desk_scale() : cfg.training;
    tc.seed = cfg.seed;

    const auto ckpt = nn::train(tr, va, spec, tc);

    const fs::path ckpt_file = stage.out_dir / "model.ckpt";
    ckpt.save(ckpt_file);
    stage.add_output(ckpt_file);

    std::string losses = "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < ckpt.meta.train_loss.size(); ++e) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", e, ckpt.meta.train_loss[e],
                      ckpt.meta.val_loss[e]);
        losses += buf;
    }
    std::ofstream os(stage.out_dir / "loss_history.csv");
    os << losses;
    os.close();
    stage.add_output(stage.out_dir / "loss_history.csv");
    stage.finish();
    std::cout << "model.ckpt: " << ckpt.weights.size() << " weights, best epoch " << ckpt.meta.best_epoch
              << " (val loss " << ckpt.meta.best_val_loss << "), " << ckpt.meta.epochs_run
              << " epochs run\n";
    return 0;
}

int cmd_predict(const GlobalOpts& g, const std::vector<std::string>& args,
                std::string ckpt_file, const std::string& segment_file, int mc_passes,
                int stride) {
    const auto cfg = load_config(g);
    Stage stage("predict", cfg, g, args);
    if (ckpt_file.empty()) ckpt_file = cfg.network_checkpoint_path;
    if (ckpt_file.empty())
        throw ConfigError("predict needs --checkpoint or network.checkpoint_path in the config");
    require_input(ckpt_file);
    require_input(segment_file);
    stage.add_input(ckpt_file);
    stage.add_input(segment_file);

    const auto ckpt = nn::Checkpoint::load(ckpt_file);
    const auto segment = io::read_segment_csv(segment_file);
    nn::PredictOptions opts;
    opts.stride_ticks = stride;
    opts.mc_passes = mc_passes;
    opts.mc_seed = cfg.seed;
    const auto est = nn::predict_trajectory(segment, ckpt, opts);

    const fs::path out_file = stage.out_dir / "pdrnn_estimates.csv";
    io::write_estimates_csv(out_file, est, config_comment(cfg));
    stage.add_output(out_file);
    stage.finish();
    std::cout << "pdrnn_estimates.csv: " << est.size() << " estimates (horizon " << ckpt.horizon_s
              << " s, " << ckpt.output_mode << " mode)\n";
    return 0;
}

// ---- evaluate ----------------------------------------------------------------

int cmd_evaluate(const GlobalOpts& g, const std::vector<std::string>& args,
                 const std::string& estimates_file, const std::string& reference_file,
                 bool settling, double settling_eps) {
    const auto cfg = load_config(g);
    Stage stage("evaluate", cfg, g, args);
    require_input(estimates_file);
    require_input(reference_file);
    stage.add_input(estimates_file);
    stage.add_input(reference_file);

    const auto est = io::read_estimates_csv(estimates_file);
    const auto ref = io::read_reference_csv(reference_file);
    const auto errors = eval::position_errors(est, ref);
    const auto report = eval::summarize(errors);

    ordered_json j;
    j["config_hash"] = cfg.hash();
    j["n"] = report.n;
    j["mae"] = report.mae;
    j["mse"] = report.mse;
    j["rmse"] = report.rmse;
    j["cep95"] = report.cep95;
    if (settling) {
        const auto events = eval::detect_abrupt_turns(ref);
        std::vector<double> times, errs;
        std::size_t k = 0;
        for (const auto& e : est) {
            (void)e;
            if (k < errors.size()) times.push_back(est[k].t);
            ++k;
        }
        times.resize(errors.size());
        const auto settles = eval::settling_times(times, errors, settling_eps, events);
        ordered_json arr = ordered_json::array();
        for (const auto& s : settles) arr.push_back(s ? ordered_json(*s) : ordered_json(nullptr));
        j["settling_events"] = events;
        j["settling_times_s"] = arr;
    }

    const fs::path out_file = stage.out_dir / "report.json";
    std::ofstream os(out_file);
    os << j.dump(2) << '\n';
    os.close();
    stage.add_output(out_file);
    stage.finish();
    std::cout << j.dump(2) << '\n';
    return 0;
}

// ---- exp ---------------------------------------------------------------------

eval::ExperimentResult dispatch_experiment(const ScenarioConfig& cfg, const std::string& design,
                                           int seeds, uint64_t base_seed) {
    const auto& e = cfg.experiment;
    if (design == "inputs")
        return eval::run_input_variation(e.scenario, e.input_sets, seeds, base_seed);
    if (design == "forecast")
        return eval::run_forecast_sweep(e.scenario, e.horizons_s, e.window_lengths, seeds, base_seed);
    if (design == "recal")
        return eval::run_recal_sweep(e.scenario, e.intervals_s, e.estimators, seeds, base_seed);
    if (design == "activity") return eval::run_activity_comparison(e.scenario, seeds, base_seed);
    throw ConfigError("unknown experiment design: " + design);
}

int cmd_exp_run(const GlobalOpts& g, const std::vector<std::string>& args, std::string design,
                int seeds) {
    auto cfg = load_config(g);
    if (design.empty()) design = cfg.experiment.design;
    if (seeds <= 0) seeds = cfg.experiment.seeds;

    Stage stage("exp", cfg, g, args);
    if (!g.config_path.empty()) stage.add_input(g.config_path);

    const auto result = dispatch_experiment(cfg, design, seeds, cfg.seed);

    const fs::path summary_file = stage.out_dir / "summary.json";
    const fs::path csv_file = stage.out_dir / "result.csv";
    {
        std::ofstream os(summary_file);
        os << eval::summary_json(result);
    }
    {
        std::ofstream os(csv_file);
        os << eval::result_csv(result);
    }
    stage.add_output(summary_file);
    stage.add_output(csv_file);

    // Embed everything replay needs.
    stage.manifest.extra["design"] = design;
    stage.manifest.extra["seeds"] = std::to_string(seeds);
    stage.manifest.extra["base_seed"] = std::to_string(cfg.seed);
    if (!g.config_path.empty()) {
        std::ifstream is(g.config_path);
        std::stringstream ss;
        ss << is.rdbuf();
        stage.manifest.extra["config_json"] = ss.str();
    } else {
        stage.manifest.extra["config_json"] = R"({"version": 1})";
    }
    stage.finish();

    std::cout << "design " << design << ": " << result.rows.size() << " cells over " << seeds
              << " seeds\n";
    for (const auto& [name, ok] : result.trends)
        std::cout << "trend " << name << ": " << (ok ? "holds" : "violated") << "\n";
    return 0;
}

int cmd_exp_replay(const GlobalOpts& g, const std::vector<std::string>& args,
                   const std::string& manifest_path) {
    require_input(manifest_path);
    const auto manifest = io::Manifest::load(manifest_path);
    if (manifest.stage != "exp")
        throw ConfigError("replay expects an 'exp' manifest, got stage '" + manifest.stage + "'");

    auto cfg = ScenarioConfig::parse(manifest.extra.at("config_json"));
    cfg.seed = std::stoull(manifest.extra.at("base_seed"));
    if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
    else cfg.out_dir = (fs::path(manifest_path).parent_path() / "replay").string();
    if (g.workers > 0) cfg.experiment.scenario.workers = g.workers;

    Stage stage("exp", cfg, g, args);
    stage.add_input(manifest_path);
    const auto result = dispatch_experiment(cfg, manifest.extra.at("design"),
                                            std::stoi(manifest.extra.at("seeds")), cfg.seed);

    const fs::path summary_file = stage.out_dir / "summary.json";
    {
        std::ofstream os(summary_file);
        os << eval::summary_json(result);
    }
    {
        std::ofstream os(stage.out_dir / "result.csv");
        os << eval::result_csv(result);
    }
    stage.add_output(summary_file);
    stage.add_output(stage.out_dir / "result.csv");
    stage.manifest.extra = manifest.extra;
    stage.finish();

    if (g.verify) {
        const auto recorded = manifest.outputs.find("summary.json");
        if (recorded == manifest.outputs.end())
            throw ConfigError("manifest records no summary.json to verify against");
        const std::string replayed = io::sha256_file(summary_file);
        if (replayed != recorded->second) {
            std::cerr << "verify FAILED: summary.json differs (recorded " << recorded->second
                      << ", replayed " << replayed << ")\n";
            return kExitNumeric;
        }
        std::cout << "verify: replayed summary.json is byte-identical\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(kToolVersion) +
                 " — loosely coupled radio/inertial pedestrian dead reckoning laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--config", g.config_path, "Scenario config JSON");
    app.add_option("--out", g.out_dir, "Output directory (overrides config out_dir)");
    auto* seed_opt = app.add_option("--seed", g.seed, "Seed (overrides config seed)");
    app.add_option("--workers", g.workers, "Worker threads for experiment cells");
    app.add_flag("--verify", g.verify, "Re-verify written artifacts against the manifest");

    auto* sim_cmd = app.add_subcommand("simulate", "Generate reference trajectories and sensor streams");

    auto* pipe_cmd = app.add_subcommand("pipeline", "Synchronize streams into segments");
    std::string in_dir;
    pipe_cmd->add_option("--in", in_dir, "Directory produced by simulate")->required();

    auto* rec_cmd = app.add_subcommand("reconstruct", "Classical dead-reckoning reconstruction");
    std::string segment_file, theta_source, rho_mode;
    double recal_interval = -1.0;
    rec_cmd->add_option("--segment", segment_file, "Segment CSV")->required();
    rec_cmd->add_option("--theta-source", theta_source, "Heading source: ori|radio|ref");
    rec_cmd->add_option("--recal-interval", recal_interval, "Recalibration interval in seconds (0 = none)");
    rec_cmd->add_option("--rho-mode", rho_mode, "Distance mode: tick|window");

    auto* kf_cmd = app.add_subcommand("kf", "Kalman-filter fusion");
    auto* kf_run_cmd = kf_cmd->add_subcommand("run", "Run the filter over sample streams");
    std::vector<std::string> kf_streams;
    double kf_q0 = -1, kf_rpos = -1, kf_rvel = -1, kf_h = -1, kf_fs = -1;
    kf_run_cmd->add_option("--streams", kf_streams, "Input JSONL stream files")->required();
    kf_run_cmd->add_option("--q0", kf_q0, "Process noise scale");
    kf_run_cmd->add_option("--r-pos", kf_rpos, "Position measurement variance");
    kf_run_cmd->add_option("--r-vel", kf_rvel, "Velocity measurement variance");
    kf_run_cmd->add_option("--horizon", kf_h, "Forecast horizon in seconds");
    kf_run_cmd->add_option("--fs-out", kf_fs, "Estimate grid rate in Hz");
    auto* kf_tune_cmd = kf_cmd->add_subcommand("tune", "Grid-search q0/r on configured scenario data");

    auto* train_cmd = app.add_subcommand("train", "Train the recurrent fusion network");
    std::vector<std::string> train_segments;
    std::string train_inputs, train_mode;
    int train_window = -1;
    double train_overlap = -1, train_horizon = -1, val_fraction = 0.15;
    bool train_desk = false;
    train_cmd->add_option("--segments", train_segments, "Segment CSV files")->required();
    train_cmd->add_option("--inputs", train_inputs, "Input channels, e.g. radio_pos,v");
    train_cmd->add_option("--window", train_window, "Window length in ticks");
    train_cmd->add_option("--overlap", train_overlap, "Window overlap fraction");
    train_cmd->add_option("--horizon", train_horizon, "Forecast horizon in seconds");
    train_cmd->add_option("--mode", train_mode, "Output mode: absolute|delta");
    train_cmd->add_option("--val-fraction", val_fraction, "Validation split fraction");
    train_cmd->add_flag("--desk", train_desk, "Desk-scale network/training presets");

    auto* pred_cmd = app.add_subcommand("predict", "Predict a trajectory with a trained checkpoint");
    std::string pred_ckpt, pred_segment;
    int mc_passes = 0, pred_stride = 1;
    pred_cmd->add_option("--checkpoint", pred_ckpt, "Checkpoint file (default: config network.checkpoint_path)");
    pred_cmd->add_option("--segment", pred_segment, "Segment CSV")->required();
    pred_cmd->add_option("--mc-passes", mc_passes, "Monte-Carlo dropout passes (0 = plain)");
    pred_cmd->add_option("--stride", pred_stride, "Window stride in ticks");

    auto* eval_cmd = app.add_subcommand("evaluate", "Compare estimates against a reference");
    std::string eval_est, eval_ref;
    bool eval_settling = false;
    double eval_eps = 0.5;
    eval_cmd->add_option("--estimates", eval_est, "Estimates CSV")->required();
    eval_cmd->add_option("--reference", eval_ref, "Reference CSV")->required();
    eval_cmd->add_flag("--settling", eval_settling, "Add settling analysis after abrupt turns");
    eval_cmd->add_option("--settling-eps", eval_eps, "Settling threshold in meters");

    auto* exp_cmd = app.add_subcommand("exp", "Scripted experiment designs");
    auto* exp_run_cmd = exp_cmd->add_subcommand("run", "Run a design");
    std::string exp_design;
    int exp_seeds = 0;
    exp_run_cmd->add_option("--design", exp_design, "inputs|forecast|recal|activity");
    exp_run_cmd->add_option("--seeds", exp_seeds, "Number of seeds");
    auto* exp_replay_cmd = exp_cmd->add_subcommand("replay", "Replay a design from a manifest");
    std::string replay_manifest;
    exp_replay_cmd->add_option("--manifest", replay_manifest, "Manifest JSON")->required();

    std::vector<std::string> args(argv, argv + argc);
    try {
        app.parse(argc, argv);
        g.seed_set = seed_opt->count() > 0;

        if (sim_cmd->parsed()) return cmd_simulate(g, args);
        if (pipe_cmd->parsed()) return cmd_pipeline(g, args, in_dir);
        if (rec_cmd->parsed())
            return cmd_reconstruct(g, args, segment_file, theta_source, recal_interval, rho_mode);
        if (kf_cmd->parsed()) {
            if (kf_run_cmd->parsed())
                return cmd_kf_run(g, args, kf_streams, kf_q0, kf_rpos, kf_rvel, kf_h, kf_fs);
            if (kf_tune_cmd->parsed()) return cmd_kf_tune(g, args);
            throw CLI::CallForHelp();
        }
        if (train_cmd->parsed())
            return cmd_train(g, args, train_segments, train_inputs, train_window, train_overlap,
                             train_horizon, train_mode, val_fraction, train_desk);
        if (pred_cmd->parsed()) return cmd_predict(g, args, pred_ckpt, pred_segment, mc_passes, pred_stride);
        if (eval_cmd->parsed()) return cmd_evaluate(g, args, eval_est, eval_ref, eval_settling, eval_eps);
        if (exp_cmd->parsed()) {
            if (exp_run_cmd->parsed()) return cmd_exp_run(g, args, exp_design, exp_seeds);
            if (exp_replay_cmd->parsed()) return cmd_exp_replay(g, args, replay_manifest);
            throw CLI::CallForHelp();
        }
        throw CLI::CallForHelp();
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    } catch (const ConfigError& e) {  // includes DataError
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
}

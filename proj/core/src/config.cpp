#include "pdrlab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pdrlab/errors.hpp"
#include "pdrlab/io/manifest.hpp"

namespace pdrlab {

namespace {

using nlohmann::json;

void expect_keys(const json& obj, const std::string& section, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key))
            throw ConfigError("unknown key '" + key + "' in config section '" + section + "'");
}

template <typename T>
void get_to(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) {
        try {
            obj.at(key).get_to(out);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config key '") + key + "': " + e.what());
        }
    }
}

void check_referenced_files(const json& node, const std::filesystem::path& base_dir,
                            const std::string& where) {
    if (node.is_object()) {
        for (const auto& [key, value] : node.items()) {
            if (value.is_string() && (key.ends_with("_path") || key.ends_with("_file"))) {
                const auto p = base_dir / value.get<std::string>();
                if (!std::filesystem::exists(p))
                    throw ConfigError("config key '" + where + key + "' references a missing file: " +
                                      p.string());
            }
            check_referenced_files(value, base_dir, where + key + ".");
        }
    } else if (node.is_array()) {
        for (const auto& v : node) check_referenced_files(v, base_dir, where);
    }
}

sim::ActivityProfile parse_activity(const json& a) {
    expect_keys(a, "activities[]",
                {"kind", "speed_mean", "speed_min", "speed_max", "turn_rate_std", "duration_s",
                 "arena_halfwidth", "initial_heading"});
    sim::ActivityProfile p;
    if (a.contains("kind")) p = sim::ActivityProfile::preset(sim::activity_from_string(a.at("kind")));
    get_to(a, "speed_mean", p.speed_mean);
    get_to(a, "speed_min", p.speed_min);
    get_to(a, "speed_max", p.speed_max);
    get_to(a, "turn_rate_std", p.turn_rate_std);
    get_to(a, "duration_s", p.duration);
    get_to(a, "arena_halfwidth", p.arena_halfwidth);
    get_to(a, "initial_heading", p.initial_heading);
    p.validate();
    return p;
}

}  // namespace

ScenarioConfig ScenarioConfig::load_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config: " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse(ss.str(), path.parent_path());
}

ScenarioConfig ScenarioConfig::parse(const std::string& text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    expect_keys(root, "<root>",
                {"version", "seed", "out_dir", "activities", "noise", "pipeline", "classic", "kalman",
                 "network", "training", "input_channels", "output_mode", "experiment"});
    ScenarioConfig c;
    if (!root.contains("version")) throw ConfigError("config requires a 'version' field");
    root.at("version").get_to(c.version);
    if (c.version != 1) throw ConfigError("unsupported config version " + std::to_string(c.version));
    get_to(root, "seed", c.seed);
    get_to(root, "out_dir", c.out_dir);

    check_referenced_files(root, base_dir, "");

    if (root.contains("activities")) {
        if (!root.at("activities").is_array()) throw ConfigError("'activities' must be an array");
        for (const auto& a : root.at("activities")) c.activities.push_back(parse_activity(a));
    }
    if (c.activities.empty()) {
        auto p = sim::ActivityProfile::preset(sim::Activity::walking);
        p.duration = 120.0;
        c.activities.push_back(p);
    }

    if (root.contains("noise")) {
        const auto& n = root.at("noise");
        expect_keys(n, "noise",
                    {"radio_pos_std", "radio_rate_hz", "radio_delay_range_s", "radio_drop_prob",
                     "imu_rate_hz", "accel_noise_std", "gyro_noise_std", "gyro_bias_walk_std",
                     "imu_delay_range_s", "speed_scale", "speed_noise_std"});
        get_to(n, "radio_pos_std", c.noise.radio_pos_std);
        get_to(n, "radio_rate_hz", c.noise.radio_rate);
        get_to(n, "radio_delay_range_s", c.noise.radio_delay_range);
        get_to(n, "radio_drop_prob", c.noise.radio_drop_prob);
        get_to(n, "imu_rate_hz", c.noise.imu_rate);
        get_to(n, "accel_noise_std", c.noise.accel_noise_std);
        get_to(n, "gyro_noise_std", c.noise.gyro_noise_std);
        get_to(n, "gyro_bias_walk_std", c.noise.gyro_bias_walk_std);
        get_to(n, "imu_delay_range_s", c.noise.imu_delay_range);
        get_to(n, "speed_scale", c.noise.speed_scale);
        get_to(n, "speed_noise_std", c.noise.speed_noise_std);
        c.noise.validate();
    }

    if (root.contains("pipeline")) {
        const auto& p = root.at("pipeline");
        expect_keys(p, "pipeline", {"fs_hz", "window", "overlap", "horizon_s", "policy", "madgwick_beta"});
        get_to(p, "fs_hz", c.pipeline.fs);
        get_to(p, "window", c.pipeline.window);
        get_to(p, "overlap", c.pipeline.overlap);
        get_to(p, "horizon_s", c.pipeline.horizon_s);
        get_to(p, "madgwick_beta", c.pipeline.madgwick_beta);
        if (p.contains("policy")) {
            const std::string policy = p.at("policy").get<std::string>();
            if (policy == "offline") c.pipeline.policy = streams::SyncPolicy::offline;
            else if (policy == "realtime") c.pipeline.policy = streams::SyncPolicy::realtime;
            else throw ConfigError("pipeline.policy must be 'offline' or 'realtime'");
        }
        if (c.pipeline.fs <= 0) throw ConfigError("pipeline.fs_hz must be > 0");
        if (c.pipeline.window < 2) throw ConfigError("pipeline.window must be >= 2");
        if (c.pipeline.overlap < 0 || c.pipeline.overlap >= 1)
            throw ConfigError("pipeline.overlap must be in [0, 1)");
        if (c.pipeline.horizon_s < 0) throw ConfigError("pipeline.horizon_s must be >= 0");
    }

    if (root.contains("classic")) {
        const auto& k = root.at("classic");
        expect_keys(k, "classic", {"theta_source", "recal_interval_s", "rho_mode"});
        get_to(k, "theta_source", c.classic.theta_source);
        get_to(k, "recal_interval_s", c.classic.recal_interval_s);
        get_to(k, "rho_mode", c.classic.rho_mode);
        if (c.classic.theta_source != "ori" && c.classic.theta_source != "radio" &&
            c.classic.theta_source != "ref")
            throw ConfigError("classic.theta_source must be one of ori|radio|ref");
        if (c.classic.rho_mode != "tick" && c.classic.rho_mode != "window")
            throw ConfigError("classic.rho_mode must be 'tick' or 'window'");
    }

    if (root.contains("kalman")) {
        const auto& k = root.at("kalman");
        expect_keys(k, "kalman",
                    {"p0", "q0", "r_pos", "r_vel", "x0", "horizon_s", "tune_grid", "accel_as_control"});
        get_to(k, "p0", c.kalman.config.p0);
        get_to(k, "q0", c.kalman.config.q0);
        get_to(k, "r_pos", c.kalman.config.r_pos);
        get_to(k, "r_vel", c.kalman.config.r_vel);
        get_to(k, "horizon_s", c.kalman.horizon_s);
        get_to(k, "accel_as_control", c.kalman.accel_as_control);
        if (k.contains("x0")) {
            const auto x0 = k.at("x0").get<std::vector<double>>();
            if (x0.size() != 4) throw ConfigError("kalman.x0 must have 4 entries");
            for (int i = 0; i < 4; ++i) c.kalman.config.x0(i) = x0[static_cast<std::size_t>(i)];
        }
        if (k.contains("tune_grid")) {
            const auto& g = k.at("tune_grid");
            expect_keys(g, "kalman.tune_grid", {"q0", "r"});
            get_to(g, "q0", c.kalman.tune_grid.q0);
            get_to(g, "r", c.kalman.tune_grid.r);
        }
        c.kalman.config.validate();
    }

    if (root.contains("network")) {
        const auto& n = root.at("network");
        expect_keys(n, "network",
                    {"ff_in_dims", "lstm_layers", "lstm_cells", "dropout_rate", "ff_out_dims",
                     "init_seed", "checkpoint_path"});
        get_to(n, "checkpoint_path", c.network_checkpoint_path);
        get_to(n, "ff_in_dims", c.network.ff_in_dims);
        get_to(n, "lstm_layers", c.network.lstm_layers);
        get_to(n, "lstm_cells", c.network.lstm_cells);
        get_to(n, "dropout_rate", c.network.dropout_rate);
        get_to(n, "ff_out_dims", c.network.ff_out_dims);
        get_to(n, "init_seed", c.network.init_seed);
    }

    if (root.contains("training")) {
        const auto& t = root.at("training");
        expect_keys(t, "training",
                    {"lr0", "beta1", "beta2", "eps", "lr_halve_every", "lr_factor", "batch", "max_epochs",
                     "early_stop_patience", "l2_weight", "grad_clip", "shuffle", "workers"});
        get_to(t, "lr0", c.training.lr0);
        get_to(t, "beta1", c.training.beta1);
        get_to(t, "beta2", c.training.beta2);
        get_to(t, "eps", c.training.eps);
        get_to(t, "lr_halve_every", c.training.lr_halve_every);
        get_to(t, "lr_factor", c.training.lr_factor);
        get_to(t, "batch", c.training.batch);
        get_to(t, "max_epochs", c.training.max_epochs);
        get_to(t, "early_stop_patience", c.training.early_stop_patience);
        get_to(t, "l2_weight", c.training.l2_weight);
        get_to(t, "grad_clip", c.training.grad_clip);
        get_to(t, "shuffle", c.training.shuffle);
        get_to(t, "workers", c.training.workers);
        c.training.validate();
    }

    get_to(root, "input_channels", c.input_channels);
    get_to(root, "output_mode", c.output_mode);
    if (c.output_mode != "absolute" && c.output_mode != "delta")
        throw ConfigError("output_mode must be 'absolute' or 'delta'");

    bool desk_scale = true;
    if (root.contains("experiment")) {
        const auto& e = root.at("experiment");
        expect_keys(e, "experiment",
                    {"design", "seeds", "train_duration_s", "test_duration_s", "train_subjects",
                     "test_subjects", "eval_stride", "input_sets", "horizons_s", "window_lengths",
                     "intervals_s", "estimators", "include_long_horizons", "settling_eps_m",
                     "settling_horizon_s", "desk_scale"});
        get_to(e, "design", c.experiment.design);
        get_to(e, "seeds", c.experiment.seeds);
        get_to(e, "train_duration_s", c.experiment.scenario.train_duration);
        get_to(e, "test_duration_s", c.experiment.scenario.test_duration);
        get_to(e, "train_subjects", c.experiment.scenario.train_subjects);
        get_to(e, "test_subjects", c.experiment.scenario.test_subjects);
        get_to(e, "eval_stride", c.experiment.scenario.eval_stride);
        get_to(e, "input_sets", c.experiment.input_sets);
        get_to(e, "horizons_s", c.experiment.horizons_s);
        get_to(e, "window_lengths", c.experiment.window_lengths);
        get_to(e, "intervals_s", c.experiment.intervals_s);
        get_to(e, "estimators", c.experiment.estimators);
        get_to(e, "include_long_horizons", c.experiment.scenario.include_long_horizons);
        get_to(e, "settling_eps_m", c.experiment.scenario.settling_eps);
        get_to(e, "settling_horizon_s", c.experiment.scenario.settling_horizon);
        get_to(e, "desk_scale", desk_scale);
        if (c.experiment.design != "inputs" && c.experiment.design != "forecast" &&
            c.experiment.design != "recal" && c.experiment.design != "activity")
            throw ConfigError("experiment.design must be one of inputs|forecast|recal|activity");
        if (c.experiment.seeds < 1) throw ConfigError("experiment.seeds must be >= 1");
    }

    // Wire shared settings into the experiment scenario. The scenario keeps
    // its own fine-tuned KF defaults unless the config sets one explicitly.
    auto& sc = c.experiment.scenario;
    sc.noise = c.noise;
    sc.fs = c.pipeline.fs;
    sc.window = c.pipeline.window;
    sc.overlap = c.pipeline.overlap;
    if (root.contains("kalman")) sc.kf = c.kalman.config;
    if (desk_scale) {
        sc.network = nn::NetworkSpec::desk_scale(0);
        sc.training = nn::TrainConfig::desk_scale();
    } else {
        sc.network = c.network;
        sc.training = c.training;
    }

    // Hash of the canonical (key-sorted, compact) document.
    c.hash_ = io::sha256_hex(root.dump());
    return c;
}

}  // namespace pdrlab

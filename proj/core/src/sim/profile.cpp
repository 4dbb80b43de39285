#include "pdrlab/sim/profile.hpp"

namespace pdrlab::sim {

const char* to_string(Activity a) {
    switch (a) {
        case Activity::walking: return "walking";
        case Activity::jogging: return "jogging";
        case Activity::running: return "running";
        case Activity::random_motion: return "random";
    }
    return "?";
}

Activity activity_from_string(const std::string& s) {
    if (s == "walking") return Activity::walking;
    if (s == "jogging") return Activity::jogging;
    if (s == "running") return Activity::running;
    if (s == "random") return Activity::random_motion;
    throw ConfigError("unknown activity: " + s);
}

ActivityProfile ActivityProfile::preset(Activity kind) {
    ActivityProfile p;
    p.kind = kind;
    switch (kind) {
        case Activity::walking:
            p.speed_mean = 1.4;
            p.speed_min = 0.8;
            p.speed_max = 2.2;
            p.turn_rate_std = 0.5;
            break;
        case Activity::jogging:
            p.speed_mean = 2.5;
            p.speed_min = 1.5;
            p.speed_max = 4.0;
            p.turn_rate_std = 0.6;
            break;
        case Activity::running:
            p.speed_mean = 3.5;
            p.speed_min = 2.0;
            p.speed_max = 7.9;
            p.turn_rate_std = 0.7;
            break;
        case Activity::random_motion:
            p.speed_mean = 2.0;
            p.speed_min = 0.8;
            p.speed_max = 4.0;
            p.turn_rate_std = 1.2;
            break;
    }
    return p;
}

void ActivityProfile::validate() const {
    if (!(speed_min > 0.0)) throw ConfigError("ActivityProfile.speed_min must be > 0");
    if (!(speed_mean > 0.0)) throw ConfigError("ActivityProfile.speed_mean must be > 0");
    if (!(speed_max > 0.0)) throw ConfigError("ActivityProfile.speed_max must be > 0");
    if (speed_min > speed_mean) throw ConfigError("ActivityProfile.speed_min must be <= speed_mean");
    if (speed_mean > speed_max) throw ConfigError("ActivityProfile.speed_mean must be <= speed_max");
    if (!(turn_rate_std >= 0.0)) throw ConfigError("ActivityProfile.turn_rate_std must be >= 0");
    if (!(duration > 0.0)) throw ConfigError("ActivityProfile.duration must be > 0");
    if (!(arena_halfwidth > 0.0)) throw ConfigError("ActivityProfile.arena_halfwidth must be > 0");
}

void SensorNoiseSpec::validate() const {
    if (!(radio_pos_std >= 0.0)) throw ConfigError("SensorNoiseSpec.radio_pos_std must be >= 0");
    if (!(radio_rate > 0.0)) throw ConfigError("SensorNoiseSpec.radio_rate must be > 0");
    if (radio_delay_range[0] < 0.0 || radio_delay_range[1] < radio_delay_range[0])
        throw ConfigError("SensorNoiseSpec.radio_delay_range must be non-negative with lo <= hi");
    if (radio_drop_prob < 0.0 || radio_drop_prob > 1.0)
        throw ConfigError("SensorNoiseSpec.radio_drop_prob must be in [0, 1]");
    if (!(imu_rate > 0.0)) throw ConfigError("SensorNoiseSpec.imu_rate must be > 0");
    if (!(accel_noise_std >= 0.0)) throw ConfigError("SensorNoiseSpec.accel_noise_std must be >= 0");
    if (!(gyro_noise_std >= 0.0)) throw ConfigError("SensorNoiseSpec.gyro_noise_std must be >= 0");
    if (!(gyro_bias_walk_std >= 0.0)) throw ConfigError("SensorNoiseSpec.gyro_bias_walk_std must be >= 0");
    if (imu_delay_range[0] < 0.0 || imu_delay_range[1] < imu_delay_range[0])
        throw ConfigError("SensorNoiseSpec.imu_delay_range must be non-negative with lo <= hi");
    if (!(speed_scale > 0.0)) throw ConfigError("SensorNoiseSpec.speed_scale must be > 0");
    if (!(speed_noise_std >= 0.0)) throw ConfigError("SensorNoiseSpec.speed_noise_std must be >= 0");
}

}  // namespace pdrlab::sim

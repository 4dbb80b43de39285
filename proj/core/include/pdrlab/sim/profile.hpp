#pragma once

#include <array>
#include <string>

#include "pdrlab/errors.hpp"

namespace pdrlab::sim {

enum class Activity { walking, jogging, running, random_motion };

const char* to_string(Activity a);
Activity activity_from_string(const std::string& s);

/// Motion-statistics knobs for one synthetic subject recording. Default
/// speed statistics are the whole-corpus values (mean 2.5, min 0.8,
/// max 7.9 m/s); presets narrow them per activity.
struct ActivityProfile {
    Activity kind = Activity::walking;
    double speed_mean = 2.5;       // m/s
    double speed_min = 0.8;        // m/s
    double speed_max = 7.9;        // m/s
    double turn_rate_std = 0.6;    // rad/s, diffusion of the turn-rate process
    double duration = 120.0;       // s
    double arena_halfwidth = 20.0; // m
    double initial_heading = 0.0;  // rad

    static ActivityProfile preset(Activity kind);

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Noise, rate and transport-delay model for the derived sensor streams.
/// Radio fixes arrive at 10 Hz with 98-244 ms motion-to-photon delay,
/// inertial samples at 100 Hz with 5-13 ms delay.
struct SensorNoiseSpec {
    double radio_pos_std = 0.15;                         // m (stand-in magnitude, see README)
    double radio_rate = 10.0;                            // Hz
    std::array<double, 2> radio_delay_range{0.098, 0.244};  // s
    double radio_drop_prob = 0.0;
    double imu_rate = 100.0;                             // Hz
    double accel_noise_std = 0.05;                       // m/s^2
    double gyro_noise_std = 0.005;                       // rad/s
    double gyro_bias_walk_std = 0.001;                   // rad/s per sqrt(s)
    std::array<double, 2> imu_delay_range{0.005, 0.013}; // s
    double speed_scale = 1.0;                            // multiplicative bias on the speed channel
    double speed_noise_std = 0.0;                        // m/s

    void validate() const;
};

}  // namespace pdrlab::sim

#include "pdrlab/sim/reference.hpp"

#include <algorithm>
#include <cmath>

#include "pdrlab/angles.hpp"
#include "pdrlab/classic/dead_reckoning.hpp"
#include "pdrlab/rng.hpp"

namespace pdrlab::sim {

namespace {

constexpr double kSpeedReversion = 0.8;   // 1/s
constexpr double kTurnReversion = 1.5;    // 1/s
constexpr double kSteerZone = 0.6;        // fraction of halfwidth where steering starts
constexpr double kSteerGain = 2.0;        // rad/s per rad of heading error
constexpr double kSteerCap = 2.5;         // rad/s
constexpr double kTurnRateCap = 3.0;      // rad/s
constexpr double kRandomTurnBoost = 3.0;  // diffusion multiplier for the random activity
constexpr double kKickDuration = 0.3;     // s, length of an impulsive turn

double steering_rate(double x, double y, double theta, double halfwidth) {
    const double r = std::max(std::abs(x), std::abs(y)) / halfwidth;
    if (r <= kSteerZone) return 0.0;
    const double desired = std::atan2(-y, -x);  // toward arena center
    const double err = wrap_angle(desired - theta);
    const double ramp = std::min((r - kSteerZone) / (1.0 - kSteerZone), 1.5);
    return std::clamp(kSteerGain * err, -kSteerCap, kSteerCap) * ramp;
}

}  // namespace

std::vector<ReferencePose> generate_reference(const ActivityProfile& profile, uint64_t seed, double dt) {
    profile.validate();
    if (!(dt > 0.0)) throw ConfigError("generate_reference: dt must be > 0");
    if (dt > 0.01 + 1e-12) throw ConfigError("generate_reference: dt must be <= 0.01 s");

    const bool random_kind = profile.kind == Activity::random_motion;
    const double sigma_v = 0.25 * (profile.speed_max - profile.speed_min);
    const double sigma_w = profile.turn_rate_std * (random_kind ? kRandomTurnBoost : 1.0);
    const auto n_steps = static_cast<std::size_t>(std::llround(profile.duration / dt));

    Rng rng(substream_seed(seed, "reference"));
    Rng kick_rng(substream_seed(seed, "reference.kick"));

    std::vector<ReferencePose> poses;
    poses.reserve(n_steps + 1);

    classic::DeadReckonState p;  // starts at the arena center
    double v = std::clamp(profile.speed_mean, profile.speed_min, profile.speed_max);
    double theta = wrap_angle(profile.initial_heading);
    double omega = 0.0;
    double cum = 0.0;

    double next_kick = random_kind ? kick_rng.uniform(3.0, 10.0) : -1.0;
    std::size_t kick_ticks_left = 0;
    double kick_rate = 0.0;

    for (std::size_t k = 0; k <= n_steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        poses.push_back({t, p.x, p.y, v, theta, cum});
        if (k == n_steps) break;

        // Advance position with the emitted (v, theta) so that the pose
        // sequence is exactly closed under the dead-reckoning fold.
        p = classic::dead_reckon_step(p, v * dt, theta);
        cum += v * dt;

        if (random_kind && kick_ticks_left == 0 && t >= next_kick) {
            const double magnitude = kick_rng.uniform(0.5 * kPi, kPi);
            const double sign = kick_rng.bernoulli(0.5) ? 1.0 : -1.0;
            kick_ticks_left = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(kKickDuration / dt)));
            kick_rate = sign * magnitude / (static_cast<double>(kick_ticks_left) * dt);
            next_kick = t + kick_rng.uniform(6.0, 14.0);
        }

        const double steer = steering_rate(p.x, p.y, theta, profile.arena_halfwidth);
        omega += kTurnReversion * (steer - omega) * dt + sigma_w * std::sqrt(dt) * rng.normal();
        omega = std::clamp(omega, -kTurnRateCap, kTurnRateCap);

        if (kick_ticks_left > 0) {
            theta = wrap_angle(theta + kick_rate * dt);
            --kick_ticks_left;
            if (kick_ticks_left == 0) omega = 0.0;
        } else {
            theta = wrap_angle(theta + omega * dt);
        }

        v += kSpeedReversion * (profile.speed_mean - v) * dt + sigma_v * std::sqrt(dt) * rng.normal();
        v = std::clamp(v, profile.speed_min, profile.speed_max);
    }

    return poses;
}

}  // namespace pdrlab::sim

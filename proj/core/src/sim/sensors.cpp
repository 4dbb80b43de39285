#include "pdrlab/sim/sensors.hpp"

#include <algorithm>
#include <cmath>

#include "pdrlab/angles.hpp"
#include "pdrlab/rng.hpp"

namespace pdrlab::sim {

namespace {

// Linear interpolation over a time-sorted pose sequence. Sample times within
// kGridEps of a pose land exactly on it, so noiseless sampling at grid times
// reproduces the reference bit-for-bit even when the sensor-rate arithmetic
// differs from the grid arithmetic by an ulp.
constexpr double kGridEps = 1e-9;

struct RefInterp {
    std::span<const ReferencePose> ref;

    // Index i of the interval with t in [t_i, t_{i+1}); clamped at the ends
    // and snapped to the nearer node within kGridEps.
    std::size_t bracket(double t) const {
        auto it = std::upper_bound(ref.begin(), ref.end(), t,
                                   [](double tt, const ReferencePose& p) { return tt < p.t; });
        std::size_t i = it == ref.begin() ? 0 : static_cast<std::size_t>(it - ref.begin()) - 1;
        i = std::min(i, ref.size() - 2);
        if (i + 2 < ref.size() && std::abs(ref[i + 1].t - t) <= kGridEps) return i + 1;
        return i;
    }

    bool at_node(std::size_t i, double t) const { return std::abs(ref[i].t - t) <= kGridEps; }

    double alpha(std::size_t i, double t) const {
        const double span = ref[i + 1].t - ref[i].t;
        return span > 0.0 ? std::clamp((t - ref[i].t) / span, 0.0, 1.0) : 0.0;
    }

    std::array<double, 2> position(double t) const {
        const std::size_t i = bracket(t);
        if (at_node(i, t)) return {ref[i].x, ref[i].y};
        if (at_node(i + 1, t)) return {ref[i + 1].x, ref[i + 1].y};
        const double a = alpha(i, t);
        return {(1.0 - a) * ref[i].x + a * ref[i + 1].x, (1.0 - a) * ref[i].y + a * ref[i + 1].y};
    }

    double speed(double t) const {
        const std::size_t i = bracket(t);
        if (at_node(i, t)) return ref[i].speed;
        if (at_node(i + 1, t)) return ref[i + 1].speed;
        const double a = alpha(i, t);
        return (1.0 - a) * ref[i].speed + a * ref[i + 1].speed;
    }
};

// Per-interval rates from the pose sequence (forward differences, last one
// repeated). Index k covers [t_k, t_{k+1}).
struct RateTable {
    std::vector<double> turn_rate;
    std::vector<double> accel_fwd;

    explicit RateTable(std::span<const ReferencePose> ref) {
        const std::size_t n = ref.size();
        turn_rate.resize(n, 0.0);
        accel_fwd.resize(n, 0.0);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const double dt = ref[k + 1].t - ref[k].t;
            if (dt > 0.0) {
                turn_rate[k] = wrap_angle(ref[k + 1].heading - ref[k].heading) / dt;
                accel_fwd[k] = (ref[k + 1].speed - ref[k].speed) / dt;
            }
        }
        if (n >= 2) {
            turn_rate[n - 1] = turn_rate[n - 2];
            accel_fwd[n - 1] = accel_fwd[n - 2];
        }
    }
};

void check_ref(std::span<const ReferencePose> ref, const char* op) {
    if (ref.empty()) throw DataError(std::string(op) + ": empty reference trajectory");
    for (std::size_t i = 1; i < ref.size(); ++i)
        if (!(ref[i].t > ref[i - 1].t)) throw DataError(std::string(op) + ": reference times must be strictly increasing");
}

}  // namespace

std::vector<SensorSample> sample_radio(std::span<const ReferencePose> ref,
                                       const SensorNoiseSpec& spec,
                                       uint64_t seed) {
    check_ref(ref, "sample_radio");
    spec.validate();

    Rng noise(substream_seed(seed, "radio.noise"));
    Rng delay(substream_seed(seed, "radio.delay"));
    Rng drop(substream_seed(seed, "radio.drop"));

    const double t0 = ref.front().t;
    const double t1 = ref.back().t;
    const auto n = static_cast<std::size_t>(std::floor((t1 - t0) * spec.radio_rate + 1e-9));
    const RefInterp interp{ref};

    std::vector<SensorSample> out;
    out.reserve(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = t0 + static_cast<double>(k) / spec.radio_rate;
        if (drop.bernoulli(spec.radio_drop_prob)) continue;
        auto p = interp.position(t);
        p[0] += noise.normal(0.0, spec.radio_pos_std);
        p[1] += noise.normal(0.0, spec.radio_pos_std);
        const double d = delay.uniform(spec.radio_delay_range[0], spec.radio_delay_range[1]);
        out.push_back({t, t + d, Modality::radio_pos, {p[0], p[1]}, "radio"});
    }
    return out;
}

std::vector<SensorSample> sample_imu(std::span<const ReferencePose> ref,
                                     const SensorNoiseSpec& spec,
                                     uint64_t seed) {
    check_ref(ref, "sample_imu");
    spec.validate();

    Rng noise(substream_seed(seed, "imu.noise"));
    Rng delay(substream_seed(seed, "imu.delay"));
    Rng bias_rng(substream_seed(seed, "imu.bias"));

    const double t0 = ref.front().t;
    const double t1 = ref.back().t;
    const double dt = 1.0 / spec.imu_rate;
    const auto n = static_cast<std::size_t>(std::floor((t1 - t0) * spec.imu_rate + 1e-9));
    const RefInterp interp{ref};
    const RateTable rates(ref);

    std::vector<SensorSample> out;
    out.reserve(3 * (n + 1));
    double gyro_bias = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = t0 + static_cast<double>(k) * dt;
        const std::size_t i = interp.bracket(t);
        const double v = interp.speed(t);
        const double omega = rates.turn_rate[i];
        const double acc_fwd = rates.accel_fwd[i];

        const double ax = acc_fwd + noise.normal(0.0, spec.accel_noise_std);
        const double ay = v * omega + noise.normal(0.0, spec.accel_noise_std);  // centripetal, +left
        const double az = kGravity + noise.normal(0.0, spec.accel_noise_std);
        const double gz = omega + gyro_bias + noise.normal(0.0, spec.gyro_noise_std);
        const double sp = v * spec.speed_scale + noise.normal(0.0, spec.speed_noise_std);
        const double d = delay.uniform(spec.imu_delay_range[0], spec.imu_delay_range[1]);

        out.push_back({t, t + d, Modality::accel, {ax, ay, az}, "imu"});
        out.push_back({t, t + d, Modality::gyro, {gz}, "imu"});
        out.push_back({t, t + d, Modality::speed, {sp}, "vel_est"});

        gyro_bias += spec.gyro_bias_walk_std * std::sqrt(dt) * bias_rng.normal();
    }
    return out;
}

std::vector<SensorSample> inject_gap(std::vector<SensorSample> stream, double start, double length) {
    if (start < 0.0) throw ConfigError("inject_gap: start must be >= 0");
    if (!(length > 0.0)) throw ConfigError("inject_gap: length must be > 0");
    const double end = start + length;
    std::erase_if(stream, [&](const SensorSample& s) { return s.t_meas >= start && s.t_meas < end; });
    return stream;
}

}  // namespace pdrlab::sim

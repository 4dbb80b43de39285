#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pdrlab/sim/profile.hpp"
#include "pdrlab/types.hpp"

namespace pdrlab::sim {

inline constexpr double kGravity = 9.81;  // m/s^2, vertical accel channel offset

/// Derive a noisy, delayed, possibly lossy radio position stream from a
/// reference trajectory. Measurement timestamps stay on the radio grid; the
/// transport delay only shifts t_avail.
std::vector<SensorSample> sample_radio(std::span<const ReferencePose> ref,
                                       const SensorNoiseSpec& spec,
                                       uint64_t seed);

/// Derive inertial streams: body-frame 3D accel (forward, lateral, vertical
/// incl. gravity), z-gyro with bias random walk, and a ground-truth-derived
/// scalar speed channel (optionally scaled, for recalibration experiments).
/// All three modalities share measurement times and per-tick delay.
std::vector<SensorSample> sample_imu(std::span<const ReferencePose> ref,
                                     const SensorNoiseSpec& spec,
                                     uint64_t seed);

/// Remove all samples with measurement time in [start, start + length).
std::vector<SensorSample> inject_gap(std::vector<SensorSample> stream, double start, double length);

}  // namespace pdrlab::sim

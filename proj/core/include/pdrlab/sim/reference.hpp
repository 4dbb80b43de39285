#pragma once

#include <cstdint>
#include <vector>

#include "pdrlab/sim/profile.hpp"
#include "pdrlab/types.hpp"

namespace pdrlab::sim {

/// Generate a ground-truth trajectory for one subject. Deterministic for a
/// given (profile, seed, dt).
///
/// Speed and turn rate evolve by discretized mean-reverting processes; the
/// heading is steered back toward the arena center once the subject enters
/// the outer boundary zone, which produces the lap-like paths of the
/// walking/jogging/running activities. The random activity adds enlarged
/// turn-rate diffusion plus impulsive >=90 deg turn events.
///
/// Positions integrate p' = p + v*dt*(cos theta, sin theta) with no position
/// clamping, so the emitted (speed, heading) sequence reproduces the emitted
/// positions exactly under the same fold.
std::vector<ReferencePose> generate_reference(const ActivityProfile& profile, uint64_t seed, double dt);

}  // namespace pdrlab::sim

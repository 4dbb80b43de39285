#pragma once

#include <array>
#include <span>
#include <vector>

#include "pdrlab/types.hpp"

namespace pdrlab::classic {

struct DeadReckonState {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;  // rad, in (-pi, pi]; last step heading, kept for inspection
    double t = 0.0;
};

/// One dead-reckoning transform: p' = p + rho * (cos theta, sin theta).
/// rho is the distance covered over the step, theta the step heading.
DeadReckonState dead_reckon_step(const DeadReckonState& state, double rho, double theta);

/// An absolute position fix applied on a schedule.
struct RecalFix {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

struct ReconstructResult {
    std::vector<DeadReckonState> trajectory;  // size rho.size() + 1, starts at (p0, t0)
    int ignored_fixes = 0;                    // fixes outside [t0, end] span
};

/// Fold dead_reckon_step over per-interval distances and headings, starting
/// from p0 at t0. step_times[k] is the time at the END of step k. Whenever a
/// scheduled fix time is crossed the position is overwritten by the fix
/// exactly; fixes outside the trajectory span are counted and skipped.
ReconstructResult reconstruct(std::array<double, 2> p0,
                              double t0,
                              std::span<const double> rho,
                              std::span<const double> theta,
                              std::span<const double> step_times,
                              std::span<const RecalFix> recal = {});

/// Convenience: uniform step times t0 + (k+1)*dt.
ReconstructResult reconstruct(std::array<double, 2> p0,
                              double t0,
                              double dt,
                              std::span<const double> rho,
                              std::span<const double> theta,
                              std::span<const RecalFix> recal = {});

}  // namespace pdrlab::classic

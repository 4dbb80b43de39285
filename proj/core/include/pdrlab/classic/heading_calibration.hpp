#pragma once

#include <array>
#include <span>
#include <vector>

namespace pdrlab::classic {

struct HeadingCalibration {
    std::vector<double> theta;  // corrected heading sequence
    bool calibrated = false;
    double offset = 0.0;  // recovered constant yaw offset (rad)
};

/// Estimate a constant yaw offset between an orientation-filter heading and
/// the movement direction implied by radio positions, and apply it.
///
/// Both sequences live on the same uniform grid at `fs`. The offset is the
/// circular mean of (theta_radio - theta_ori) over the trailing `window_s`
/// seconds; it is only applied when the displacement across that window
/// exceeds `motion_threshold_m` (heading from positions is meaningless while
/// standing still). Below the threshold the input is returned unchanged with
/// `calibrated = false`.
HeadingCalibration calibrate_heading(std::span<const double> theta_ori,
                                     std::span<const std::array<double, 2>> radio_positions,
                                     double window_s,
                                     double fs,
                                     double motion_threshold_m = 0.5);

}  // namespace pdrlab::classic

#pragma once

#include <span>
#include <vector>

#include "pdrlab/heading.hpp"
#include "pdrlab/streams/segment.hpp"
#include "pdrlab/types.hpp"

namespace pdrlab::streams {

using pdrlab::radio_heading;

/// offline: interpolate between the two nearest measurements by t_meas,
/// using the whole recording. realtime: a grid value may only use samples
/// whose t_avail is not after the grid time; beyond the last available
/// measurement the value is held flat (zero-order hold).
enum class SyncPolicy { offline, realtime };

struct SyncOptions {
    double fs = 100.0;
    SyncPolicy policy = SyncPolicy::offline;
    double madgwick_beta = 0.1;  // orientation filter gain for the derived theta_ori channel
    std::string segment_id = "segment";
};

/// Resample asynchronous multi-rate streams onto one uniform grid.
///
/// Channels produced: p_radio, theta_radio (movement direction between
/// consecutive radio fixes), v, theta_ori (from heading samples when
/// present, otherwise an orientation filter folded over gyro+accel), acc.
/// Ticks outside any bracketing pair are marked missing; under the realtime
/// policy the last available value extends flat instead. Angle channels are
/// interpolated on the unit circle.
Segment synchronize(std::span<const std::vector<SensorSample>> streams, const SyncOptions& opts);

/// Resample a reference trajectory onto the segment grid (for training and
/// evaluation; deployment segments carry no reference).
void attach_reference(Segment& segment, std::span<const ReferencePose> ref);

}  // namespace pdrlab::streams

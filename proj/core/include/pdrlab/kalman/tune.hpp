#pragma once

#include <span>
#include <vector>

#include "pdrlab/kalman/filter.hpp"
#include "pdrlab/types.hpp"

namespace pdrlab::kalman {

/// One training recording: a raw sample stream plus its reference trajectory.
struct TuneCase {
    std::vector<SensorSample> samples;
    std::vector<ReferencePose> ref;
};

struct TuneGrid {
    std::vector<double> q0;
    std::vector<double> r;  // applied to both r_pos and r_vel
};

/// Pick the (q0, r) grid cell minimizing mean position MAE of the filtered
/// trajectory over the training cases. Ties break toward smaller q0, then
/// smaller r (the grid is scanned in ascending order with strict
/// improvement).
KfConfig kf_tune(std::span<const TuneCase> cases, const TuneGrid& grid, double fs_out = 100.0);

}  // namespace pdrlab::kalman

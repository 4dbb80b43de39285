#pragma once

#include <array>
#include <span>
#include <vector>

namespace pdrlab {

/// Movement direction from an ordered 2D position sequence:
/// theta_k = atan2(y_{k+1} - y_k, x_{k+1} - x_k). The last heading repeats
/// the previous one and zero-length deltas reuse the previous heading (0 if
/// there is none yet). Throws DataError for fewer than 2 points.
std::vector<double> radio_heading(std::span<const std::array<double, 2>> positions);

}  // namespace pdrlab

#include "pdrlab/heading.hpp"

#include <cmath>

#include "pdrlab/errors.hpp"

namespace pdrlab {

std::vector<double> radio_heading(std::span<const std::array<double, 2>> positions) {
    if (positions.size() < 2) throw DataError("radio_heading: need at least 2 positions");

    std::vector<double> headings(positions.size());
    double prev = 0.0;
    for (std::size_t k = 0; k + 1 < positions.size(); ++k) {
        const double dx = positions[k + 1][0] - positions[k][0];
        const double dy = positions[k + 1][1] - positions[k][1];
        if (dx != 0.0 || dy != 0.0) prev = std::atan2(dy, dx);
        headings[k] = prev;
    }
    headings[positions.size() - 1] = prev;
    return headings;
}

}  // namespace pdrlab

#include "pdrlab/classic/heading_calibration.hpp"

#include <algorithm>
#include <cmath>

#include "pdrlab/angles.hpp"
#include "pdrlab/errors.hpp"
#include "pdrlab/heading.hpp"

namespace pdrlab::classic {

HeadingCalibration calibrate_heading(std::span<const double> theta_ori,
                                     std::span<const std::array<double, 2>> radio_positions,
                                     double window_s,
                                     double fs,
                                     double motion_threshold_m) {
    if (theta_ori.size() != radio_positions.size())
        throw ConfigError("calibrate_heading: sequences must have equal length");
    if (fs <= 0.0 || window_s <= 0.0) throw ConfigError("calibrate_heading: fs and window must be > 0");
    if (radio_positions.size() < 2) throw DataError("calibrate_heading: need at least 2 radio positions");

    const std::size_t n = theta_ori.size();
    const std::size_t win = std::min<std::size_t>(n, std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(window_s * fs))));
    const std::size_t begin = n - win;

    HeadingCalibration out;
    out.theta.assign(theta_ori.begin(), theta_ori.end());

    const double dx = radio_positions[n - 1][0] - radio_positions[begin][0];
    const double dy = radio_positions[n - 1][1] - radio_positions[begin][1];
    if (std::sqrt(dx * dx + dy * dy) < motion_threshold_m) return out;  // motion gate

    const auto theta_radio = radio_heading(radio_positions.subspan(begin));
    std::vector<double> residuals;
    residuals.reserve(win);
    for (std::size_t k = 0; k < win; ++k) residuals.push_back(wrap_angle(theta_radio[k] - theta_ori[begin + k]));

    out.offset = circular_mean(residuals);
    out.calibrated = true;
    for (double& th : out.theta) th = wrap_angle(th + out.offset);
    return out;
}

}  // namespace pdrlab::classic

#include "pdrlab/classic/dead_reckoning.hpp"

#include <algorithm>
#include <cmath>

#include "pdrlab/angles.hpp"
#include "pdrlab/errors.hpp"

namespace pdrlab::classic {

DeadReckonState dead_reckon_step(const DeadReckonState& state, double rho, double theta) {
    if (rho < 0.0) throw ConfigError("dead_reckon_step: rho must be >= 0");
    DeadReckonState out = state;
    out.x = state.x + rho * std::cos(theta);
    out.y = state.y + rho * std::sin(theta);
    out.heading = wrap_angle(theta);
    return out;
}

ReconstructResult reconstruct(std::array<double, 2> p0,
                              double t0,
                              std::span<const double> rho,
                              std::span<const double> theta,
                              std::span<const double> step_times,
                              std::span<const RecalFix> recal) {
    if (rho.size() != theta.size() || rho.size() != step_times.size())
        throw ConfigError("reconstruct: rho, theta and step_times must have equal length");

    std::vector<RecalFix> fixes(recal.begin(), recal.end());
    std::sort(fixes.begin(), fixes.end(), [](const RecalFix& a, const RecalFix& b) { return a.t < b.t; });

    ReconstructResult result;
    result.trajectory.reserve(rho.size() + 1);

    DeadReckonState state;
    state.x = p0[0];
    state.y = p0[1];
    state.t = t0;
    result.trajectory.push_back(state);

    std::size_t fi = 0;
    while (fi < fixes.size() && fixes[fi].t < t0) {
        ++fi;
        ++result.ignored_fixes;
    }

    for (std::size_t k = 0; k < rho.size(); ++k) {
        state = dead_reckon_step(state, rho[k], theta[k]);
        state.t = step_times[k];
        while (fi < fixes.size() && fixes[fi].t <= state.t) {
            state.x = fixes[fi].x;
            state.y = fixes[fi].y;
            ++fi;
        }
        result.trajectory.push_back(state);
    }

    result.ignored_fixes += static_cast<int>(fixes.size() - fi);
    return result;
}

ReconstructResult reconstruct(std::array<double, 2> p0,
                              double t0,
                              double dt,
                              std::span<const double> rho,
                              std::span<const double> theta,
                              std::span<const RecalFix> recal) {
    if (dt <= 0.0) throw ConfigError("reconstruct: dt must be > 0");
    std::vector<double> times(rho.size());
    for (std::size_t k = 0; k < times.size(); ++k) times[k] = t0 + static_cast<double>(k + 1) * dt;
    return reconstruct(p0, t0, rho, theta, times, recal);
}

}  // namespace pdrlab::classic

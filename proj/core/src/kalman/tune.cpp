#include "pdrlab/kalman/tune.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdrlab/errors.hpp"

namespace pdrlab::kalman {

namespace {

// Mean Euclidean position error of estimates against the reference, matched
// by nearest reference tick.
double run_mae(const TuneCase& c, const KfConfig& config, double fs_out) {
    const auto est = kf_run(c.samples, config, {.fs_out = fs_out, .horizon = 0.0});
    double sum = 0.0;
    std::size_t n = 0;
    std::size_t j = 0;
    for (const auto& e : est) {
        while (j + 1 < c.ref.size() &&
               std::abs(c.ref[j + 1].t - e.t) <= std::abs(c.ref[j].t - e.t))
            ++j;
        const auto& r = c.ref[j];
        if (std::abs(r.t - e.t) > 0.5 / fs_out + 1e-9) continue;
        sum += std::hypot(e.x - r.x, e.y - r.y);
        ++n;
    }
    if (n == 0) throw DataError("kf_tune: estimates do not overlap the reference");
    return sum / static_cast<double>(n);
}

}  // namespace

KfConfig kf_tune(std::span<const TuneCase> cases, const TuneGrid& grid, double fs_out) {
    if (cases.empty()) throw ConfigError("kf_tune: no training cases");
    if (grid.q0.empty() || grid.r.empty()) throw ConfigError("kf_tune: empty tuning grid");
    for (const auto& c : cases)
        if (c.samples.empty() || c.ref.empty()) throw ConfigError("kf_tune: training case without samples or reference");

    std::vector<double> q0s(grid.q0.begin(), grid.q0.end());
    std::vector<double> rs(grid.r.begin(), grid.r.end());
    std::sort(q0s.begin(), q0s.end());
    std::sort(rs.begin(), rs.end());

    KfConfig best;
    double best_loss = std::numeric_limits<double>::infinity();
    for (double q0 : q0s) {
        for (double r : rs) {
            KfConfig cand;
            cand.q0 = q0;
            cand.r_pos = r;
            cand.r_vel = r;
            cand.validate();
            double loss = 0.0;
            for (const auto& c : cases) loss += run_mae(c, cand, fs_out);
            loss /= static_cast<double>(cases.size());
            if (loss < best_loss) {
                best_loss = loss;
                best = cand;
            }
        }
    }
    return best;
}

}  // namespace pdrlab::kalman

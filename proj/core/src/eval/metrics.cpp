#include "pdrlab/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "pdrlab/angles.hpp"
#include "pdrlab/errors.hpp"

namespace pdrlab::eval {

std::vector<double> position_errors(std::span<const PoseEstimate> est,
                                    std::span<const ReferencePose> ref) {
    if (est.empty()) throw DataError("position_errors: empty estimate trajectory");
    if (ref.size() < 2) throw DataError("position_errors: reference needs at least 2 poses");

    // Half-tick matching tolerance from the median reference spacing.
    std::vector<double> gaps;
    gaps.reserve(ref.size() - 1);
    for (std::size_t i = 1; i < ref.size(); ++i) gaps.push_back(ref[i].t - ref[i - 1].t);
    std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2), gaps.end());
    const double tol = 0.5 * gaps[gaps.size() / 2] + 1e-9;

    std::vector<double> errors;
    errors.reserve(est.size());
    std::size_t j = 0;
    for (const auto& e : est) {
        while (j + 1 < ref.size() && std::abs(ref[j + 1].t - e.t) <= std::abs(ref[j].t - e.t)) ++j;
        if (std::abs(ref[j].t - e.t) > tol) continue;
        errors.push_back(std::hypot(e.x - ref[j].x, e.y - ref[j].y));
    }
    if (errors.empty()) throw DataError("position_errors: estimate and reference time ranges do not overlap");
    return errors;
}

ErrorReport summarize(std::span<const double> errors) {
    if (errors.empty()) throw DataError("summarize: empty error set");

    ErrorReport r;
    r.n = errors.size();
    double sum = 0.0, sq = 0.0;
    for (double e : errors) {
        sum += e;
        sq += e * e;
    }
    r.mae = sum / static_cast<double>(r.n);
    r.mse = sq / static_cast<double>(r.n);
    r.rmse = std::sqrt(r.mse);

    std::vector<double> sorted(errors.begin(), errors.end());
    std::sort(sorted.begin(), sorted.end());
    const auto idx = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(r.n)));  // 1-based
    r.cep95 = sorted[idx - 1];
    return r;
}

std::vector<std::optional<double>> settling_times(std::span<const double> t,
                                                  std::span<const double> err,
                                                  double eps,
                                                  std::span<const double> events,
                                                  double dwell) {
    if (t.size() != err.size()) throw ConfigError("settling_times: time/error length mismatch");
    if (!(eps > 0.0)) throw ConfigError("settling_times: eps must be > 0");
    if (dwell < 0.0) throw ConfigError("settling_times: dwell must be >= 0");

    std::vector<std::optional<double>> out;
    out.reserve(events.size());
    for (double ev : events) {
        std::optional<double> settle;
        std::optional<double> run_start;
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (t[k] < ev) continue;
            if (err[k] < eps) {
                if (!run_start) run_start = t[k];
                if (t[k] - *run_start >= dwell) {
                    settle = *run_start - ev;
                    break;
                }
            } else {
                run_start.reset();
            }
        }
        out.push_back(settle);
    }
    return out;
}

std::vector<double> detect_abrupt_turns(std::span<const ReferencePose> ref,
                                        double min_angle,
                                        double window_s,
                                        double refractory_s) {
    std::vector<double> events;
    if (ref.size() < 2) return events;
    double last_event = -refractory_s - 1.0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        while (j + 1 < ref.size() && ref[j].t < ref[i].t + window_s) ++j;
        if (ref[j].t - ref[i].t < 0.5 * window_s) break;  // tail too short
        const double change = std::abs(wrap_angle(ref[j].heading - ref[i].heading));
        if (change >= min_angle && ref[i].t - last_event >= refractory_s) {
            events.push_back(ref[i].t);
            last_event = ref[i].t;
        }
    }
    return events;
}

}  // namespace pdrlab::eval

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pdrlab/types.hpp"

namespace pdrlab::eval {

/// Per-sample Euclidean distances between estimates and the reference,
/// matched by nearest reference tick within half a tick. Estimates without a
/// match are skipped; throws DataError when nothing aligns at all.
std::vector<double> position_errors(std::span<const PoseEstimate> est,
                                    std::span<const ReferencePose> ref);

struct ErrorReport {
    std::size_t n = 0;
    double mae = 0.0;
    double mse = 0.0;
    double rmse = 0.0;
    double cep95 = 0.0;  // upper order statistic at ceil(0.95 n)
};

/// MAE / MSE / RMSE / CEP95 of a non-empty error set. CEP95 is the smallest
/// sorted value covering at least 95% of the samples (1-based order
/// statistic at ceil(0.95 n)).
ErrorReport summarize(std::span<const double> errors);

/// For each event, the time after it at which the error first stays below
/// eps for at least `dwell` seconds continuously; unset when that never
/// happens within the data.
std::vector<std::optional<double>> settling_times(std::span<const double> t,
                                                  std::span<const double> err,
                                                  double eps,
                                                  std::span<const double> events,
                                                  double dwell = 0.2);

/// Times of abrupt direction changes in a reference trajectory: heading
/// change of at least min_angle within window_s, coalesced by a refractory
/// interval.
std::vector<double> detect_abrupt_turns(std::span<const ReferencePose> ref,
                                        double min_angle = 1.5,
                                        double window_s = 0.5,
                                        double refractory_s = 2.0);

}  // namespace pdrlab::eval

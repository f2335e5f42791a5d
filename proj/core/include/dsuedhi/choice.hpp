#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dsuedhi/info_types.hpp"
#include "dsuedhi/matrix.hpp"
#include "dsuedhi/network.hpp"
#include "dsuedhi/paths.hpp"

namespace dsuedhi {

struct ChoiceParams {
  double theta = 1.0;       // logit dispersion, per disutility unit
  double mu_early = 0.8;
  double mu_late = 1.2;
  /// Seconds per disutility time unit. Travel times and schedule gaps are
  /// divided by it before entering the disutility.
  double time_unit = 60.0;
};

/// Throws ValidationError unless theta > 0, 0 < mu_early < 1 < mu_late and
/// time_unit > 0.
void validate(const ChoiceParams& params);

/// phi + mu_early * gap^2 when arriving early, phi + mu_late * gap^2
/// otherwise, with gap = t + phi - target and all times in time units.
double systematic_disutility(double travel_time, double departure, double target_arrival,
                             const ChoiceParams& params);

/// Disutility of one OD's choices at one provision interval: rows are the
/// OD's paths, columns the remaining intervals provision .. T-1.
struct DisutilityMatrix {
  std::size_t provision = 0;
  Matrix values;
};

/// Every remaining column reuses the path's single instantaneous time.
DisutilityMatrix disutility_from_instant(std::span<const double> path_times, std::size_t provision,
                                         const TimeGrid& grid, double target_arrival,
                                         const ChoiceParams& params);

/// `path_times` has one column per remaining interval.
DisutilityMatrix disutility_from_forecast(const Matrix& path_times, std::size_t provision,
                                          const TimeGrid& grid, double target_arrival,
                                          const ChoiceParams& params);

/// Joint logit over all cells of `psi`; throws std::invalid_argument when empty.
Matrix logit_probabilities(const Matrix& psi, double theta);

/// Departures planned at interval `provision` for every path (rows) and every
/// remaining interval (columns).
struct TentativeDepartures {
  std::size_t provision = 0;
  Matrix values;
};

/// Logit assignment of each OD's remaining demand. Per-OD totals are exact:
/// the rounding residual is added to the most likely cell.
TentativeDepartures tentative_departures(const InstantInfo& info, std::span<const double> remaining,
                                         const Network& net, const PathSet& paths,
                                         const TimeGrid& grid, const ChoiceParams& params);
TentativeDepartures tentative_departures(const ForecastInfo& info,
                                         std::span<const double> remaining, const Network& net,
                                         const PathSet& paths, const TimeGrid& grid,
                                         const ChoiceParams& params);

/// Demand per OD not yet departed before interval `provision`, given the
/// realized departures (paths x T) and the demand per OD. Overdraws smaller
/// than 1e-9 relative are clamped to zero; larger ones throw ModelError.
std::vector<double> remaining_demand(const Matrix& realized, std::span<const double> demand,
                                     const PathSet& paths, std::size_t provision);

/// The column of the tentative departures for the provision interval itself.
std::vector<double> realize_departures(const TentativeDepartures& tentative);

}  // namespace dsuedhi

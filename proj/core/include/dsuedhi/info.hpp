#pragma once

#include <cstddef>
#include <span>

#include "dsuedhi/choice.hpp"
#include "dsuedhi/dnl.hpp"
#include "dsuedhi/info_types.hpp"

namespace dsuedhi {

InstantInfo instant_info(const LoadingResult& loading, std::size_t provision);

/// Predicted departures of all remaining travellers, both classes pooled, as
/// if every one of them reacted to the instantaneous information.
TentativeDepartures forecast_departures(const InstantInfo& info,
                                        std::span<const double> remaining_total,
                                        const Network& net, const PathSet& paths,
                                        const TimeGrid& grid, const ChoiceParams& params);

/// Columns before the provision interval come from `history`, the rest from
/// the forecast.
Matrix splice(const Matrix& history, const TentativeDepartures& forecast);

/// Path travel times of the forecast world for the remaining departure
/// intervals, read from a loading of the spliced departures.
ForecastInfo forecast_info(const LoadingResult& forecast_loading, std::size_t provision);

/// Loads `spliced` and extracts the forecast information from it.
ForecastInfo forecast_info(const Loader& loader, const Matrix& spliced, std::size_t provision);

}  // namespace dsuedhi

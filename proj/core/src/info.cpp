#include "dsuedhi/info.hpp"

#include <stdexcept>

namespace dsuedhi {

InstantInfo instant_info(const LoadingResult& loading, std::size_t provision) {
  return {provision, loading.instantaneous_path_times(provision)};
}

TentativeDepartures forecast_departures(const InstantInfo& info,
                                        std::span<const double> remaining_total,
                                        const Network& net, const PathSet& paths,
                                        const TimeGrid& grid, const ChoiceParams& params) {
  return tentative_departures(info, remaining_total, net, paths, grid, params);
}

Matrix splice(const Matrix& history, const TentativeDepartures& forecast) {
  const auto k = forecast.provision;
  if (forecast.values.rows() != history.rows() || k + forecast.values.cols() != history.cols()) {
    throw std::invalid_argument("forecast does not fit the departure history");
  }
  Matrix out = history;
  for (std::size_t p = 0; p < out.rows(); ++p) {
    for (std::size_t j = 0; j < forecast.values.cols(); ++j) out(p, k + j) = forecast.values(p, j);
  }
  return out;
}

ForecastInfo forecast_info(const LoadingResult& forecast_loading, std::size_t provision) {
  const auto& times = forecast_loading.path_times();
  if (provision >= times.cols()) throw std::out_of_range("provision interval outside horizon");
  ForecastInfo out{provision, Matrix(times.rows(), times.cols() - provision)};
  for (std::size_t p = 0; p < times.rows(); ++p) {
    for (std::size_t j = 0; j < out.times.cols(); ++j) out.times(p, j) = times(p, provision + j);
  }
  return out;
}

ForecastInfo forecast_info(const Loader& loader, const Matrix& spliced, std::size_t provision) {
  return forecast_info(loader.load(spliced), provision);
}

}  // namespace dsuedhi

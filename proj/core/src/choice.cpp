#include "dsuedhi/choice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dsuedhi/error.hpp"

namespace dsuedhi {

void validate(const ChoiceParams& params) {
  if (!(params.theta > 0.0) || !std::isfinite(params.theta)) {
    throw ValidationError("theta must be positive");
  }
  if (!(params.mu_early > 0.0 && params.mu_early < 1.0 && params.mu_late > 1.0) ||
      !std::isfinite(params.mu_late)) {
    throw ValidationError("penalties must satisfy 0 < mu_early < 1 < mu_late");
  }
  if (!(params.time_unit > 0.0) || !std::isfinite(params.time_unit)) {
    throw ValidationError("disutility time unit must be positive");
  }
}

double systematic_disutility(double travel_time, double departure, double target_arrival,
                             const ChoiceParams& params) {
  const double phi = travel_time / params.time_unit;
  const double gap = (departure + travel_time - target_arrival) / params.time_unit;
  const double mu = gap < 0.0 ? params.mu_early : params.mu_late;
  return phi + mu * gap * gap;
}

namespace {

std::size_t remaining_columns(const TimeGrid& grid, std::size_t provision) {
  if (provision >= grid.intervals()) throw std::out_of_range("provision interval outside horizon");
  return grid.intervals() - provision;
}

template <class TimeAt>
TentativeDepartures assign(std::size_t provision, std::span<const double> remaining,
                           const Network& net, const PathSet& paths, const TimeGrid& grid,
                           const ChoiceParams& params, TimeAt time_at) {
  const auto cols = remaining_columns(grid, provision);
  if (remaining.size() != net.ods().size()) {
    throw std::invalid_argument("remaining demand must have one entry per OD");
  }
  TentativeDepartures out{provision, Matrix(paths.size(), cols)};
  for (std::size_t w = 0; w < net.ods().size(); ++w) {
    const double d = remaining[w];
    if (d <= 0.0) continue;
    const auto first = paths.begin(w);
    const auto n = paths.count(w);
    Matrix psi(n, cols);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        psi(i, j) = systematic_disutility(time_at(first + i, j),
                                          grid.representative(provision + j),
                                          net.od(w).target_arrival, params);
      }
    }
    const auto prob = logit_probabilities(psi, params.theta);
    double total = 0.0;
    std::size_t best_i = 0;
    std::size_t best_j = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        const double v = prob(i, j) * d;
        out.values(first + i, j) = v;
        total += v;
        if (prob(i, j) > prob(best_i, best_j)) {
          best_i = i;
          best_j = j;
        }
      }
    }
    out.values(first + best_i, best_j) += d - total;
  }
  return out;
}

}  // namespace

DisutilityMatrix disutility_from_instant(std::span<const double> path_times, std::size_t provision,
                                         const TimeGrid& grid, double target_arrival,
                                         const ChoiceParams& params) {
  const auto cols = remaining_columns(grid, provision);
  DisutilityMatrix out{provision, Matrix(path_times.size(), cols)};
  for (std::size_t i = 0; i < path_times.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      out.values(i, j) = systematic_disutility(path_times[i], grid.representative(provision + j),
                                               target_arrival, params);
    }
  }
  return out;
}

DisutilityMatrix disutility_from_forecast(const Matrix& path_times, std::size_t provision,
                                          const TimeGrid& grid, double target_arrival,
                                          const ChoiceParams& params) {
  const auto cols = remaining_columns(grid, provision);
  if (path_times.cols() != cols) {
    throw std::invalid_argument("forecast has " + std::to_string(path_times.cols()) +
                                " columns, expected " + std::to_string(cols));
  }
  DisutilityMatrix out{provision, Matrix(path_times.rows(), cols)};
  for (std::size_t i = 0; i < path_times.rows(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      out.values(i, j) = systematic_disutility(
          path_times(i, j), grid.representative(provision + j), target_arrival, params);
    }
  }
  return out;
}

Matrix logit_probabilities(const Matrix& psi, double theta) {
  if (psi.empty()) throw std::invalid_argument("empty choice set");
  const auto v = psi.values();
  const double lowest = *std::min_element(v.begin(), v.end());
  Matrix p(psi.rows(), psi.cols());
  auto out = p.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(-theta * (v[i] - lowest));
    sum += out[i];
  }
  for (auto& x : out) x /= sum;
  return p;
}

TentativeDepartures tentative_departures(const InstantInfo& info, std::span<const double> remaining,
                                         const Network& net, const PathSet& paths,
                                         const TimeGrid& grid, const ChoiceParams& params) {
  if (info.times.size() != paths.size()) {
    throw std::invalid_argument("instantaneous information must cover every path");
  }
  return assign(info.provision, remaining, net, paths, grid, params,
                [&](std::size_t p, std::size_t) { return info.times[p]; });
}

TentativeDepartures tentative_departures(const ForecastInfo& info,
                                         std::span<const double> remaining, const Network& net,
                                         const PathSet& paths, const TimeGrid& grid,
                                         const ChoiceParams& params) {
  if (info.times.rows() != paths.size() ||
      info.times.cols() != remaining_columns(grid, info.provision)) {
    throw std::invalid_argument("forecast information has the wrong shape");
  }
  return assign(info.provision, remaining, net, paths, grid, params,
                [&](std::size_t p, std::size_t j) { return info.times(p, j); });
}

std::vector<double> remaining_demand(const Matrix& realized, std::span<const double> demand,
                                     const PathSet& paths, std::size_t provision) {
  if (demand.size() != paths.od_count() || realized.rows() != paths.size()) {
    throw std::invalid_argument("demand and departures do not match the path set");
  }
  const auto upto = std::min(provision, realized.cols());
  std::vector<double> out(demand.size());
  for (std::size_t w = 0; w < demand.size(); ++w) {
    double departed = 0.0;
    for (auto p = paths.begin(w); p < paths.end(w); ++p) {
      for (std::size_t t = 0; t < upto; ++t) departed += realized(p, t);
    }
    double left = demand[w] - departed;
    if (left < 0.0) {
      if (-left > 1e-9 * std::max(1.0, demand[w])) {
        throw ModelError("departures exceed demand by " + std::to_string(-left) + " vehicles");
      }
      left = 0.0;
    }
    out[w] = left;
  }
  return out;
}

std::vector<double> realize_departures(const TentativeDepartures& tentative) {
  if (tentative.values.cols() == 0) throw std::invalid_argument("no remaining interval");
  return tentative.values.column(0);
}

}  // namespace dsuedhi

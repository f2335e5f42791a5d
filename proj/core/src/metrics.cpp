#include "dsuedhi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dsuedhi/error.hpp"

namespace dsuedhi {

void TrimWindow::validate() const {
  if (!(fraction >= 0.0 && fraction < 0.5)) {
    throw ValidationError("trim fraction must lie in [0, 0.5)");
  }
}

std::size_t TrimWindow::first(std::size_t intervals) const {
  // The small slack keeps e.g. 0.2 * 150 from rounding down to 29.
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(intervals) + 1e-9));
}

std::size_t TrimWindow::last(std::size_t intervals) const {
  const auto f = first(intervals);
  return intervals > 2 * f ? intervals - f : f;
}

const char* to_string(InfoClass c) { return c == InfoClass::Instant ? "instant" : "forecast"; }

AccuracyReport information_accuracy(const MapEvaluation& evaluation, const ClassDepartures& h,
                                    const PathSet& paths, const TrimWindow& trim) {
  trim.validate();
  const Matrix& rtt = evaluation.loading.path_times();
  const auto P = rtt.rows();
  const auto T = rtt.cols();
  if (evaluation.instant.rows() != P || evaluation.instant.cols() != T ||
      evaluation.forecast_diagonal.rows() != P || evaluation.forecast_diagonal.cols() != T ||
      h.instant.rows() != P || h.instant.cols() != T) {
    throw std::invalid_argument("stored information does not match the departures");
  }
  AccuracyReport r;
  r.first = trim.first(T);
  r.last = trim.last(T);
  r.od_instant.assign(paths.od_count(), 0.0);
  r.od_forecast.assign(paths.od_count(), 0.0);

  double si = 0.0, sf = 0.0, sr = 0.0;
  for (std::size_t w = 0; w < paths.od_count(); ++w) {
    double wi = 0.0, wf = 0.0, wr = 0.0;
    for (auto p = paths.begin(w); p < paths.end(w); ++p) {
      for (auto t = r.first; t < r.last; ++t) {
        const double real = rtt(p, t);
        const double di = evaluation.instant(p, t) - real;
        const double df = evaluation.forecast_diagonal(p, t) - real;
        wi += di * di;
        wf += df * df;
        wr += real * real;
      }
    }
    si += wi;
    sf += wf;
    sr += wr;
    r.od_instant[w] = wr > 0 ? std::sqrt(wi / wr) : 0.0;
    r.od_forecast[w] = wr > 0 ? std::sqrt(wf / wr) : 0.0;
  }
  r.instant_norm = std::sqrt(si);
  r.forecast_norm = std::sqrt(sf);
  r.realized_norm = std::sqrt(sr);

  auto emit = [&](InfoClass cls, const Matrix& itt, const Matrix& dep) {
    for (std::size_t p = 0; p < P; ++p) {
      for (auto t = r.first; t < r.last; ++t) {
        if (!(dep(p, t) > kDepartureFloor)) continue;
        const double real = rtt(p, t);
        const double rel = real > 0 ? (itt(p, t) - real) / real : 0.0;
        r.records.push_back({cls, paths[p].od, p, t, itt(p, t), real, rel, dep(p, t)});
      }
    }
  };
  emit(InfoClass::Instant, evaluation.instant, h.instant);
  emit(InfoClass::Forecast, evaluation.forecast_diagonal, h.forecast);
  return r;
}

double DisutilityReport::instant_average() const {
  return instant_departures > 0 ? instant_total / instant_departures : 0.0;
}
double DisutilityReport::forecast_average() const {
  return forecast_departures > 0 ? forecast_total / forecast_departures : 0.0;
}
double DisutilityReport::average() const {
  const double d = instant_departures + forecast_departures;
  return d > 0 ? (instant_total + forecast_total) / d : 0.0;
}

DisutilityReport experienced_disutility(const ClassDepartures& h, const LoadingResult& loading,
                                        const Problem& problem, const TrimWindow& trim) {
  trim.validate();
  const auto& paths = problem.paths();
  const auto& grid = problem.grid();
  const Matrix& rtt = loading.path_times();
  const auto T = grid.intervals();
  DisutilityReport r;
  r.ods.resize(paths.od_count());
  for (std::size_t w = 0; w < paths.od_count(); ++w) {
    auto& o = r.ods[w];
    const double target = problem.network().od(w).target_arrival;
    for (auto p = paths.begin(w); p < paths.end(w); ++p) {
      for (auto t = trim.first(T); t < trim.last(T); ++t) {
        const double v =
            systematic_disutility(rtt(p, t), grid.representative(t), target, problem.params());
        o.instant_total += h.instant(p, t) * v;
        o.forecast_total += h.forecast(p, t) * v;
        o.instant_departures += h.instant(p, t);
        o.forecast_departures += h.forecast(p, t);
      }
    }
    r.instant_total += o.instant_total;
    r.forecast_total += o.forecast_total;
    r.instant_departures += o.instant_departures;
    r.forecast_departures += o.forecast_departures;
  }
  return r;
}

std::vector<double> od_total_travel_time(const Matrix& h, const LoadingResult& loading,
                                         const PathSet& paths, const TrimWindow& trim) {
  trim.validate();
  const Matrix& rtt = loading.path_times();
  const auto T = rtt.cols();
  std::vector<double> out(paths.od_count(), 0.0);
  for (std::size_t w = 0; w < paths.od_count(); ++w) {
    for (auto p = paths.begin(w); p < paths.end(w); ++p) {
      for (auto t = trim.first(T); t < trim.last(T); ++t) out[w] += h(p, t) * rtt(p, t);
    }
  }
  return out;
}

double total_travel_time(const Matrix& h, const LoadingResult& loading, const TrimWindow& trim) {
  trim.validate();
  const Matrix& rtt = loading.path_times();
  const auto T = rtt.cols();
  double s = 0.0;
  for (std::size_t p = 0; p < rtt.rows(); ++p) {
    for (auto t = trim.first(T); t < trim.last(T); ++t) s += h(p, t) * rtt(p, t);
  }
  return s;
}

double relative_difference(double a, double b) {
  if (b == 0.0) throw std::invalid_argument("relative difference against zero");
  return (a - b) / b;
}

double relative_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("relative difference of unequal sizes");
  double num = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) num += (a[i] - b[i]) * (a[i] - b[i]);
  const double den = squared_norm(b);
  if (den == 0.0) throw std::invalid_argument("relative difference against a zero vector");
  return std::sqrt(num / den);
}

double peak_share(const Matrix& h, const PathSet& paths) {
  double peak = 0.0;
  double total = 0.0;
  for (std::size_t w = 0; w < paths.od_count(); ++w) {
    double m = 0.0;
    for (auto p = paths.begin(w); p < paths.end(w); ++p) {
      for (const double v : h.row(p)) {
        m = std::max(m, v);
        total += v;
      }
    }
    peak += m;
  }
  return total > 0 ? peak / total : 0.0;
}

}  // namespace dsuedhi

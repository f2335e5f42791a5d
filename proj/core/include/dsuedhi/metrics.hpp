#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dsuedhi/choice.hpp"
#include "dsuedhi/dnl.hpp"
#include "dsuedhi/equilibrium.hpp"
#include "dsuedhi/matrix.hpp"
#include "dsuedhi/paths.hpp"

namespace dsuedhi {

/// Warm-up and cool-down exclusion: a fraction of the intervals is dropped
/// at each end of the horizon.
struct TrimWindow {
  double fraction = 0.2;

  /// Throws ValidationError unless 0 <= fraction < 0.5.
  void validate() const;
  std::size_t first(std::size_t intervals) const;
  std::size_t last(std::size_t intervals) const;  // one past the end
  bool contains(std::size_t t, std::size_t intervals) const {
    return t >= first(intervals) && t < last(intervals);
  }
};

enum class InfoClass { Instant, Forecast };

const char* to_string(InfoClass c);

/// Cells with departures at or below this are left out of the record list.
inline constexpr double kDepartureFloor = 1e-6;

struct AccuracyRecord {
  InfoClass cls = InfoClass::Instant;
  std::size_t od = 0;
  std::size_t path = 0;
  std::size_t t = 0;
  double itt = 0.0;  // informed travel time (s)
  double rtt = 0.0;  // realized travel time (s)
  double rel_diff = 0.0;
  double departures = 0.0;
};

struct AccuracyReport {
  std::size_t first = 0;
  std::size_t last = 0;
  std::vector<AccuracyRecord> records;
  // Euclidean norms over every (path, interval) in the window.
  double instant_norm = 0.0;   // ||instantaneous - realized||
  double forecast_norm = 0.0;  // ||forecast - realized||
  double realized_norm = 0.0;  // ||realized||
  // Per OD, ||ITT - RTT|| / ||RTT|| over the OD's choices, unweighted.
  std::vector<double> od_instant;
  std::vector<double> od_forecast;

  double instant_relative() const { return realized_norm > 0 ? instant_norm / realized_norm : 0.0; }
  double forecast_relative() const {
    return realized_norm > 0 ? forecast_norm / realized_norm : 0.0;
  }
};

/// Compares the information stored in `evaluation` (taken at the
/// equilibrium departures `h`) with the realized times of its loading.
AccuracyReport information_accuracy(const MapEvaluation& evaluation, const ClassDepartures& h,
                                    const PathSet& paths, const TrimWindow& trim);

struct OdDisutility {
  double instant_total = 0.0;
  double forecast_total = 0.0;
  double instant_departures = 0.0;
  double forecast_departures = 0.0;

  double total() const { return instant_total + forecast_total; }
  double departures() const { return instant_departures + forecast_departures; }
};

struct DisutilityReport {
  std::vector<OdDisutility> ods;
  double instant_total = 0.0;
  double forecast_total = 0.0;
  double instant_departures = 0.0;
  double forecast_departures = 0.0;

  double instant_average() const;
  double forecast_average() const;
  double average() const;
};

/// Systematic disutility at the realized travel times, weighted by the class
/// departures inside the window.
DisutilityReport experienced_disutility(const ClassDepartures& h, const LoadingResult& loading,
                                        const Problem& problem, const TrimWindow& trim);

/// Sum of departures times realized travel time (s) inside the window.
double total_travel_time(const Matrix& h, const LoadingResult& loading, const TrimWindow& trim);
/// The same, per OD.
std::vector<double> od_total_travel_time(const Matrix& h, const LoadingResult& loading,
                                         const PathSet& paths, const TrimWindow& trim);

/// (a - b) / b; throws std::invalid_argument when b is 0.
double relative_difference(double a, double b);
/// ||a - b|| / ||b||; throws std::invalid_argument when ||b|| is 0 or the sizes differ.
double relative_difference(std::span<const double> a, std::span<const double> b);

/// Demand-weighted concentration of departures: sum over ODs of the largest
/// single (path, interval) cell divided by the total demand.
double peak_share(const Matrix& h, const PathSet& paths);

}  // namespace dsuedhi

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dsuedhi/matrix.hpp"
#include "dsuedhi/network.hpp"
#include "dsuedhi/paths.hpp"

namespace dsuedhi {

/// Path x interval departures (vehicles). Used for a single class or the
/// total of both classes.
using DepartureMatrix = Matrix;

struct DnlOptions {
  /// Simulation steps per departure interval; 0 picks the smallest count for
  /// which every link's free-flow and backward-wave times span a full step
  /// and the step does not exceed max_step.
  std::size_t substeps = 0;
  /// Longest automatic simulation step (s).
  double max_step = 10.0;
  /// Intervals simulated after the departure horizon so late trips finish.
  std::size_t clearance_intervals = 0;
  /// Vehicles allowed to wait in any origin queue before loading fails.
  double max_source_queue = std::numeric_limits<double>::infinity();
};

/// Piecewise-linear cumulative curve sampled every `step` seconds from t = 0.
/// Values before t = 0 are 0, values after the last sample are held.
struct CurveView {
  std::span<const double> values;
  double step = 1.0;

  double at(double t) const noexcept;
  /// First time the curve reaches `target`; nullopt if it never does.
  std::optional<double> first_reach(double target) const noexcept;
};

/// Sending rate (veh/s) of a link over [t, t + dt): the vehicles that have
/// reached the downstream end by t + dt and not yet left, capped by capacity:
/// min(C, (N_up(t + dt - L/v) - N_dn(t)) / dt), floored at 0.
double link_demand(const Link& link, const CurveView& up, const CurveView& dn, double t, double dt);

/// Receiving rate (veh/s) of a link over [t, t + dt), limited by capacity and
/// by the storage freed by the backward wave:
/// min(C, (N_dn(t + dt - L/w) + k_jam L - N_up(t)) / dt), floored at 0.
double link_supply(const Link& link, const CurveView& up, const CurveView& dn, double t, double dt);

struct NodeFlux {
  std::vector<double> incoming;  // flow actually sent by each incoming link
  Matrix movements;              // incoming x outgoing flows
};

/// Junction model. `turning` holds the outgoing split of each incoming
/// link's demand (rows sum to 1 or are zero). Outgoing supply is shared among
/// movements in proportion to their demand; each incoming link then sends at
/// the most restrictive ratio over the branches it feeds (FIFO).
NodeFlux node_flux(std::span<const double> demands, std::span<const double> supplies,
                   const Matrix& turning);

namespace detail {
struct Topology;
}

/// Output of one loading run: cumulative curves plus link and path travel
/// times for every departure interval (evaluated at the interval midpoint).
class LoadingResult {
 public:
  double step() const noexcept { return step_; }
  std::size_t steps() const noexcept { return steps_; }
  double end_time() const noexcept { return step_ * static_cast<double>(steps_); }

  CurveView upstream(std::size_t link) const { return {up_.at(link), step_}; }
  CurveView downstream(std::size_t link) const { return {dn_.at(link), step_}; }
  CurveView departures(std::size_t link) const;  // origin queue arrivals for first links
  CurveView entered(std::size_t link) const;     // origin queue discharge into the link

  /// links x T: travel time of a vehicle entering the link at the interval midpoint.
  const Matrix& link_times() const noexcept { return link_times_; }
  /// paths x T: travel time of a vehicle departing at the interval midpoint.
  const Matrix& path_times() const noexcept { return path_times_; }
  /// True when the trip did not finish inside the simulated horizon and its
  /// exit time was extrapolated.
  bool extrapolated(std::size_t path, std::size_t interval) const;
  std::size_t extrapolated_count() const noexcept;

  /// Travel time on a link for a vehicle entering at clock time `entry`.
  double link_travel_time(std::size_t link, double entry) const;
  /// Travel time on a path for a vehicle departing at clock time `departure`.
  double path_travel_time(std::size_t path, double departure, bool* extrapolated = nullptr) const;
  /// Sum over the path's links of the link travel times for entry at the
  /// midpoint of interval t, i.e. every link read at the same clock time.
  std::vector<double> instantaneous_path_times(std::size_t interval) const;

  /// Vehicles that reached their destination by the end of the simulation.
  double arrived() const noexcept;
  double departed() const noexcept;
  /// Vehicles still on links or in origin queues at the end.
  double stored() const noexcept;

 private:
  friend class Loader;
  double exit_time(std::size_t link, double entry, bool& extrapolated) const;

  std::shared_ptr<const detail::Topology> topo_;
  double step_ = 0.0;
  std::size_t steps_ = 0;
  std::vector<std::vector<double>> up_;
  std::vector<std::vector<double>> dn_;
  std::vector<std::vector<double>> dep_;  // per link, empty unless it is a first link
  std::vector<std::vector<double>> ent_;
  std::vector<double> sink_;              // cumulative arrivals per destination node
  Matrix link_times_;
  Matrix path_times_;
  std::vector<std::uint8_t> extrapolated_;
};

/// Dynamic network loading with a link transmission model on a triangular
/// fundamental diagram. Origins feed first links through unbounded point
/// queues; destinations absorb everything. Path composition is tracked per
/// link so that splits at diverges follow FIFO exactly.
class Loader {
 public:
  Loader(const Network& net, const PathSet& paths, const TimeGrid& grid, DnlOptions opts = {});
  ~Loader();
  Loader(const Loader&) = delete;
  Loader& operator=(const Loader&) = delete;

  /// Deterministic and thread-safe; throws ModelError when an origin queue
  /// exceeds DnlOptions::max_source_queue.
  LoadingResult load(const DepartureMatrix& total) const;

  std::size_t substeps() const noexcept;
  double step() const noexcept;
  const TimeGrid& grid() const noexcept { return grid_; }
  /// Number of load() calls made so far.
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  TimeGrid grid_;
  std::shared_ptr<const detail::Topology> topo_;
  double max_source_queue_ = std::numeric_limits<double>::infinity();
  mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace dsuedhi

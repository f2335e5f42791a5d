#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dsuedhi {

/// Uniform discretisation of the departure horizon into T intervals.
class TimeGrid {
 public:
  /// Throws ValidationError unless horizon / interval is a positive integer.
  TimeGrid(double horizon_s, double interval_s);

  std::size_t intervals() const noexcept { return count_; }
  double interval() const noexcept { return interval_; }
  double horizon() const noexcept { return horizon_; }

  double start(std::size_t k) const noexcept { return static_cast<double>(k) * interval_; }

  /// Clock time that stands for interval k when a single departure moment,
  /// provision moment or link-entry moment is needed: the interval midpoint.
  double representative(std::size_t k) const noexcept {
    return (static_cast<double>(k) + 0.5) * interval_;
  }

  /// Interval containing clock time s (clamped to the horizon).
  std::size_t index_of(double s) const noexcept;

 private:
  double horizon_;
  double interval_;
  std::size_t count_;
};

// Raw records as they come out of the input files.

struct LinkRecord {
  std::string id;
  std::string tail;
  std::string head;
  double length_m = 0.0;
  double free_speed_mps = 0.0;
  double backward_wave_speed_mps = 0.0;
  double capacity_veh_per_s = 0.0;
  double jam_density_veh_per_m = 0.0;
};

struct DemandRecord {
  std::string origin;
  std::string destination;
  double demand_instant = 0.0;
  double demand_forecast = 0.0;
  double target_arrival_s = 0.0;
  /// Optional declared total; when present it must equal the class sum.
  std::optional<double> demand_total;
};

struct Link {
  std::string id;
  std::size_t tail = 0;
  std::size_t head = 0;
  double length = 0.0;      // m
  double free_speed = 0.0;  // m/s
  double wave_speed = 0.0;  // m/s, backward
  double capacity = 0.0;    // veh/s
  double jam_density = 0.0; // veh/m

  double free_flow_time() const noexcept { return length / free_speed; }
  double backward_time() const noexcept { return length / wave_speed; }
  double storage() const noexcept { return jam_density * length; }
};

struct OdPair {
  std::size_t origin = 0;
  std::size_t destination = 0;
  double demand_instant = 0.0;
  double demand_forecast = 0.0;
  double target_arrival = 0.0;  // s

  double demand() const noexcept { return demand_instant + demand_forecast; }
};

/// Validated, immutable network with dense indices. Nodes, links and OD
/// pairs are ordered canonically (natural order of their ids) so that every
/// derived quantity is independent of input record order.
class Network {
 public:
  std::span<const std::string> nodes() const noexcept { return nodes_; }
  std::span<const Link> links() const noexcept { return links_; }
  std::span<const OdPair> ods() const noexcept { return ods_; }

  const Link& link(std::size_t a) const { return links_.at(a); }
  const OdPair& od(std::size_t w) const { return ods_.at(w); }
  const std::string& node_name(std::size_t n) const { return nodes_.at(n); }
  std::string od_label(std::size_t w) const;

  /// Links leaving node n, in link index order.
  std::span<const std::size_t> out_links(std::size_t n) const { return out_.at(n); }

  std::optional<std::size_t> find_node(const std::string& name) const;
  std::optional<std::size_t> find_link(const std::string& id) const;

  double total_demand() const noexcept;
  /// Share of travellers receiving instantaneous information (lambda).
  double instant_share() const noexcept;

  /// Copy with each OD's demand re-split so that a fraction `share` of it
  /// receives forecast information.
  Network with_forecast_share(double share) const;
  /// Copy with all class demands multiplied by `factor`.
  Network with_demand_scaled(double factor) const;

  friend Network validate_network(std::span<const std::string>, std::span<const LinkRecord>,
                                  std::span<const DemandRecord>);

 private:
  std::vector<std::string> nodes_;
  std::vector<Link> links_;
  std::vector<OdPair> ods_;
  std::vector<std::vector<std::size_t>> out_;
};

/// Checks the raw records and assigns dense indices. `nodes` may be empty,
/// in which case the node set is the set of link endpoints. Throws
/// ValidationError on a dangling node reference, a non-positive physical
/// parameter, an OD pair without a path or class demands that are negative.
Network validate_network(std::span<const std::string> nodes, std::span<const LinkRecord> links,
                         std::span<const DemandRecord> demand);

/// Orders ids numerically when both are integers, lexicographically otherwise.
bool natural_less(const std::string& a, const std::string& b);

}  // namespace dsuedhi

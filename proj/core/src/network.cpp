#include "dsuedhi/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <map>
#include <set>

#include "dsuedhi/error.hpp"

namespace dsuedhi {

TimeGrid::TimeGrid(double horizon_s, double interval_s)
    : horizon_(horizon_s), interval_(interval_s), count_(0) {
  if (!(interval_s > 0.0) || !std::isfinite(interval_s)) {
    throw ValidationError("interval length must be positive");
  }
  if (!(horizon_s > 0.0) || !std::isfinite(horizon_s)) {
    throw ValidationError("horizon must be positive");
  }
  const double ratio = horizon_s / interval_s;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw ValidationError("horizon must be an integer multiple of the interval length");
  }
  count_ = static_cast<std::size_t>(rounded);
}

std::size_t TimeGrid::index_of(double s) const noexcept {
  if (s <= 0.0) return 0;
  const auto k = static_cast<std::size_t>(std::floor(s / interval_));
  return std::min(k, count_ - 1);
}

bool natural_less(const std::string& a, const std::string& b) {
  long long ia = 0;
  long long ib = 0;
  const auto ra = std::from_chars(a.data(), a.data() + a.size(), ia);
  const auto rb = std::from_chars(b.data(), b.data() + b.size(), ib);
  const bool a_int = ra.ec == std::errc{} && ra.ptr == a.data() + a.size() && !a.empty();
  const bool b_int = rb.ec == std::errc{} && rb.ptr == b.data() + b.size() && !b.empty();
  if (a_int && b_int && ia != ib) return ia < ib;
  if (a_int != b_int) return a_int;
  return a < b;
}

std::string Network::od_label(std::size_t w) const {
  const auto& od = ods_.at(w);
  return nodes_[od.origin] + ">" + nodes_[od.destination];
}

std::optional<std::size_t> Network::find_node(const std::string& name) const {
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), name, natural_less);
  if (it == nodes_.end() || *it != name) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

std::optional<std::size_t> Network::find_link(const std::string& id) const {
  const auto it = std::lower_bound(links_.begin(), links_.end(), id,
                                   [](const Link& l, const std::string& v) {
                                     return natural_less(l.id, v);
                                   });
  if (it == links_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - links_.begin());
}

double Network::total_demand() const noexcept {
  double s = 0.0;
  for (const auto& od : ods_) s += od.demand();
  return s;
}

double Network::instant_share() const noexcept {
  double inst = 0.0;
  for (const auto& od : ods_) inst += od.demand_instant;
  const double total = total_demand();
  return total > 0.0 ? inst / total : 1.0;
}

Network Network::with_forecast_share(double share) const {
  if (!(share >= 0.0 && share <= 1.0)) {
    throw ValidationError("forecast share must lie in [0, 1]");
  }
  Network out = *this;
  for (auto& od : out.ods_) {
    const double d = od.demand();
    od.demand_forecast = share * d;
    od.demand_instant = d - od.demand_forecast;
  }
  return out;
}

Network Network::with_demand_scaled(double factor) const {
  if (!(factor >= 0.0) || !std::isfinite(factor)) {
    throw ValidationError("demand scale must be non-negative");
  }
  Network out = *this;
  for (auto& od : out.ods_) {
    od.demand_instant *= factor;
    od.demand_forecast *= factor;
  }
  return out;
}

namespace {

void require_positive(double v, const std::string& what, const std::string& link) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ValidationError("link " + link + ": " + what + " must be positive");
  }
}

}  // namespace

Network validate_network(std::span<const std::string> nodes, std::span<const LinkRecord> links,
                         std::span<const DemandRecord> demand) {
  Network net;

  std::set<std::string, decltype(&natural_less)> node_set(&natural_less);
  const bool explicit_nodes = !nodes.empty();
  if (explicit_nodes) {
    for (const auto& n : nodes) {
      if (!node_set.insert(n).second) throw ValidationError("duplicate node " + n);
    }
  } else {
    for (const auto& l : links) {
      node_set.insert(l.tail);
      node_set.insert(l.head);
    }
    for (const auto& d : demand) {
      node_set.insert(d.origin);
      node_set.insert(d.destination);
    }
  }
  net.nodes_.assign(node_set.begin(), node_set.end());

  auto node_index = [&](const std::string& name, const std::string& context) {
    const auto idx = net.find_node(name);
    if (!idx) throw ValidationError(context + " references unknown node " + name);
    return *idx;
  };

  std::vector<LinkRecord> sorted(links.begin(), links.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const LinkRecord& a, const LinkRecord& b) { return natural_less(a.id, b.id); });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].id == sorted[i - 1].id) throw ValidationError("duplicate link " + sorted[i].id);
  }

  for (const auto& r : sorted) {
    require_positive(r.length_m, "length", r.id);
    require_positive(r.free_speed_mps, "free-flow speed", r.id);
    require_positive(r.backward_wave_speed_mps, "backward wave speed", r.id);
    require_positive(r.capacity_veh_per_s, "capacity", r.id);
    require_positive(r.jam_density_veh_per_m, "jam density", r.id);
    Link l;
    l.id = r.id;
    l.tail = node_index(r.tail, "link " + r.id);
    l.head = node_index(r.head, "link " + r.id);
    if (l.tail == l.head) throw ValidationError("link " + r.id + " is a self-loop");
    l.length = r.length_m;
    l.free_speed = r.free_speed_mps;
    l.wave_speed = r.backward_wave_speed_mps;
    l.capacity = r.capacity_veh_per_s;
    l.jam_density = r.jam_density_veh_per_m;
    net.links_.push_back(std::move(l));
  }

  net.out_.assign(net.nodes_.size(), {});
  for (std::size_t a = 0; a < net.links_.size(); ++a) net.out_[net.links_[a].tail].push_back(a);

  std::map<std::pair<std::size_t, std::size_t>, OdPair> od_map;
  for (const auto& d : demand) {
    const std::string context = "OD " + d.origin + ">" + d.destination;
    OdPair od;
    od.origin = node_index(d.origin, context);
    od.destination = node_index(d.destination, context);
    if (od.origin == od.destination) throw ValidationError(context + ": origin equals destination");
    if (!(d.demand_instant >= 0.0) || !(d.demand_forecast >= 0.0) ||
        !std::isfinite(d.demand_instant) || !std::isfinite(d.demand_forecast)) {
      throw ValidationError(context + ": class demands must be non-negative");
    }
    if (d.demand_total) {
      const double sum = d.demand_instant + d.demand_forecast;
      if (std::abs(*d.demand_total - sum) > 1e-9 * std::max(1.0, std::abs(sum))) {
        throw ValidationError(context + ": class demands do not sum to the total");
      }
    }
    if (!std::isfinite(d.target_arrival_s)) {
      throw ValidationError(context + ": target arrival must be finite");
    }
    od.demand_instant = d.demand_instant;
    od.demand_forecast = d.demand_forecast;
    od.target_arrival = d.target_arrival_s;
    if (!od_map.emplace(std::pair{od.origin, od.destination}, od).second) {
      throw ValidationError(context + ": duplicate OD pair");
    }
  }
  // Node indices already follow natural order, so the map order is canonical.
  for (const auto& [key, od] : od_map) net.ods_.push_back(od);

  for (std::size_t w = 0; w < net.ods_.size(); ++w) {
    const auto& od = net.ods_[w];
    std::vector<char> seen(net.nodes_.size(), 0);
    std::deque<std::size_t> queue{od.origin};
    seen[od.origin] = 1;
    while (!queue.empty()) {
      const auto n = queue.front();
      queue.pop_front();
      for (const auto a : net.out_[n]) {
        const auto h = net.links_[a].head;
        if (!seen[h]) {
          seen[h] = 1;
          queue.push_back(h);
        }
      }
    }
    if (!seen[od.destination]) throw ValidationError("OD pair with no path: " + net.od_label(w));
  }
  return net;
}

}  // namespace dsuedhi

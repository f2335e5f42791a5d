#include "dsuedhi/dnl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dsuedhi/error.hpp"

namespace dsuedhi {

namespace {

constexpr std::size_t kSink = static_cast<std::size_t>(-1);

double count_tolerance(double count) { return 1e-10 * std::max(1.0, std::abs(count)); }
double queue_tolerance(double count) { return 1e-9 * std::max(1.0, std::abs(count)); }

double clamp_time(double t, double lo, double hi) { return std::min(std::max(t, lo), hi); }

}  // namespace

double CurveView::at(double t) const noexcept {
  if (values.empty() || t <= 0.0) return values.empty() ? 0.0 : (t < 0.0 ? 0.0 : values.front());
  const double pos = t / step;
  const auto last = values.size() - 1;
  if (pos >= static_cast<double>(last)) return values.back();
  const auto j = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(j);
  return values[j] + frac * (values[j + 1] - values[j]);
}

std::optional<double> CurveView::first_reach(double target) const noexcept {
  if (values.empty()) return std::nullopt;
  if (values.front() >= target) return 0.0;
  const auto it = std::lower_bound(values.begin(), values.end(), target);
  if (it == values.end()) return std::nullopt;
  const auto j = static_cast<std::size_t>(it - values.begin());
  const double lo = values[j - 1];
  const double hi = values[j];
  const double frac = hi > lo ? (target - lo) / (hi - lo) : 1.0;
  return (static_cast<double>(j - 1) + std::clamp(frac, 0.0, 1.0)) * step;
}

double link_demand(const Link& link, const CurveView& up, const CurveView& dn, double t,
                   double dt) {
  const double arrived = up.at(t + dt - link.free_flow_time()) - dn.at(t);
  if (arrived <= 0.0) return 0.0;
  return std::min(link.capacity, arrived / dt);
}

double link_supply(const Link& link, const CurveView& up, const CurveView& dn, double t,
                   double dt) {
  const double room = dn.at(t + dt - link.backward_time()) + link.storage() - up.at(t);
  if (room <= 0.0) return 0.0;
  return std::min(link.capacity, room / dt);
}

namespace {

/// Movement restriction shared by node_flux and the loader: fills `ratio`
/// (one per incoming row) given row-major movement demands.
void restriction(std::span<const double> movement, std::size_t n_in, std::size_t n_out,
                 std::span<const double> supplies, std::span<double> out_ratio,
                 std::span<double> ratio) {
  for (std::size_t b = 0; b < n_out; ++b) {
    double total = 0.0;
    for (std::size_t i = 0; i < n_in; ++i) total += movement[i * n_out + b];
    out_ratio[b] = total > supplies[b] ? supplies[b] / total : 1.0;
  }
  for (std::size_t i = 0; i < n_in; ++i) {
    double r = 1.0;
    for (std::size_t b = 0; b < n_out; ++b) {
      if (movement[i * n_out + b] > 0.0) r = std::min(r, out_ratio[b]);
    }
    ratio[i] = r;
  }
}

}  // namespace

NodeFlux node_flux(std::span<const double> demands, std::span<const double> supplies,
                   const Matrix& turning) {
  const auto n_in = demands.size();
  const auto n_out = supplies.size();
  if (turning.rows() != n_in || turning.cols() != n_out) {
    throw std::invalid_argument("turning fractions must be incoming x outgoing");
  }
  Matrix movement(n_in, n_out);
  for (std::size_t i = 0; i < n_in; ++i) {
    for (std::size_t b = 0; b < n_out; ++b) movement(i, b) = demands[i] * turning(i, b);
  }
  std::vector<double> out_ratio(n_out);
  std::vector<double> ratio(n_in);
  restriction(movement.values(), n_in, n_out, supplies, out_ratio, ratio);
  NodeFlux flux{std::vector<double>(n_in), Matrix(n_in, n_out)};
  for (std::size_t i = 0; i < n_in; ++i) {
    flux.incoming[i] = ratio[i] * demands[i];
    for (std::size_t b = 0; b < n_out; ++b) flux.movements(i, b) = ratio[i] * movement(i, b);
  }
  return flux;
}

namespace detail {

struct Member {
  std::size_t path = 0;
  std::size_t next_link = kSink;
  std::size_t next_slot = 0;  // member index on next_link
  std::size_t column = 0;     // outgoing column at the head node
};

struct NodeLayout {
  std::vector<std::size_t> in_links;   // links ending here
  std::vector<std::size_t> src_links;  // first links starting here that carry departures
  std::vector<std::size_t> out_links;  // links starting here; column out_links.size() is the sink
};

struct Topology {
  std::vector<Link> links;
  std::vector<std::vector<std::size_t>> path_links;
  std::vector<std::vector<Member>> members;       // per link
  std::vector<std::vector<std::size_t>> sources;  // per link: paths starting on it
  std::vector<std::size_t> source_slot;           // per path: index in sources[first link]
  std::vector<std::size_t> first_member;          // per path: member index on its first link
  std::vector<std::size_t> link_destination;      // head node per link
  std::vector<NodeLayout> nodes;
  std::size_t intervals = 0;
  std::size_t substeps = 1;
  std::size_t steps = 0;
  double interval = 0.0;
  double step = 0.0;
};

}  // namespace detail

Loader::Loader(const Network& net, const PathSet& paths, const TimeGrid& grid, DnlOptions opts)
    : grid_(grid) {
  auto topo = std::make_shared<detail::Topology>();
  topo->links.assign(net.links().begin(), net.links().end());
  const auto n_links = topo->links.size();
  const auto n_paths = paths.size();

  double min_time = std::numeric_limits<double>::infinity();
  for (const auto& l : topo->links) {
    min_time = std::min({min_time, l.free_flow_time(), l.backward_time()});
  }
  std::size_t n_sub = opts.substeps;
  if (n_sub == 0) {
    double bound = opts.max_step > 0.0 ? opts.max_step : grid.interval();
    if (std::isfinite(min_time)) bound = std::min(bound, min_time);
    n_sub = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(grid.interval() / bound - 1e-9)));
  }
  const double step = grid.interval() / static_cast<double>(n_sub);
  if (step > min_time * (1.0 + 1e-9)) {
    throw ValidationError("DNL step exceeds the shortest link free-flow or backward-wave time");
  }
  topo->intervals = grid.intervals();
  topo->substeps = n_sub;
  topo->interval = grid.interval();
  topo->step = step;
  topo->steps = (grid.intervals() + opts.clearance_intervals) * n_sub;

  topo->path_links.resize(n_paths);
  topo->members.assign(n_links, {});
  topo->sources.assign(n_links, {});
  topo->source_slot.assign(n_paths, 0);
  topo->first_member.assign(n_paths, 0);
  std::vector<std::vector<std::size_t>> slot(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    const auto& links = paths[p].links;
    topo->path_links[p] = links;
    slot[p].resize(links.size());
    for (std::size_t i = 0; i < links.size(); ++i) {
      slot[p][i] = topo->members[links[i]].size();
      topo->members[links[i]].push_back(detail::Member{p});
    }
    topo->first_member[p] = slot[p][0];
    topo->source_slot[p] = topo->sources[links[0]].size();
    topo->sources[links[0]].push_back(p);
  }

  topo->nodes.assign(net.nodes().size(), {});
  for (std::size_t a = 0; a < n_links; ++a) {
    topo->nodes[topo->links[a].head].in_links.push_back(a);
    topo->nodes[topo->links[a].tail].out_links.push_back(a);
    if (!topo->sources[a].empty()) topo->nodes[topo->links[a].tail].src_links.push_back(a);
  }
  topo->link_destination.resize(n_links);
  for (std::size_t a = 0; a < n_links; ++a) topo->link_destination[a] = topo->links[a].head;

  for (std::size_t p = 0; p < n_paths; ++p) {
    const auto& links = paths[p].links;
    for (std::size_t i = 0; i < links.size(); ++i) {
      auto& m = topo->members[links[i]][slot[p][i]];
      const auto& layout = topo->nodes[topo->links[links[i]].head];
      if (i + 1 < links.size()) {
        m.next_link = links[i + 1];
        m.next_slot = slot[p][i + 1];
        const auto it = std::find(layout.out_links.begin(), layout.out_links.end(), links[i + 1]);
        m.column = static_cast<std::size_t>(it - layout.out_links.begin());
      } else {
        m.next_link = kSink;
        m.column = layout.out_links.size();
      }
    }
  }
  topo_ = std::move(topo);
  max_source_queue_ = opts.max_source_queue;
}

Loader::~Loader() = default;

std::size_t Loader::substeps() const noexcept { return topo_->substeps; }
double Loader::step() const noexcept { return topo_->step; }

LoadingResult Loader::load(const DepartureMatrix& total) const {
  const auto& topo = *topo_;
  const auto n_links = topo.links.size();
  const auto n_paths = topo.path_links.size();
  const auto T = topo.intervals;
  const auto K = topo.steps;
  const double dt = topo.step;
  if (total.rows() != n_paths || total.cols() != T) {
    throw std::invalid_argument("departure matrix must be paths x intervals");
  }
  for (double v : total.values()) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ModelError("departures must be finite and non-negative");
  }
  calls_.fetch_add(1, std::memory_order_relaxed);

  LoadingResult res;
  res.topo_ = topo_;
  res.step_ = dt;
  res.steps_ = K;

  // Per-member cumulative curves, [link][member][step].
  std::vector<std::vector<std::vector<double>>> up_m(n_links), dn_m(n_links);
  std::vector<std::vector<std::vector<double>>> dep_m(n_links), ent_m(n_links);
  res.up_.assign(n_links, std::vector<double>(K + 1, 0.0));
  res.dn_.assign(n_links, std::vector<double>(K + 1, 0.0));
  res.dep_.assign(n_links, {});
  res.ent_.assign(n_links, {});
  res.sink_.assign(topo.nodes.size(), 0.0);
  for (std::size_t a = 0; a < n_links; ++a) {
    up_m[a].assign(topo.members[a].size(), std::vector<double>(K + 1, 0.0));
    dn_m[a].assign(topo.members[a].size(), std::vector<double>(K + 1, 0.0));
    if (topo.sources[a].empty()) continue;
    const auto& src = topo.sources[a];
    dep_m[a].assign(src.size(), std::vector<double>(K + 1, 0.0));
    ent_m[a].assign(src.size(), std::vector<double>(K + 1, 0.0));
    res.dep_[a].assign(K + 1, 0.0);
    res.ent_[a].assign(K + 1, 0.0);
    for (std::size_t s = 0; s < src.size(); ++s) {
      auto& curve = dep_m[a][s];
      const auto row = total.row(src[s]);
      double acc = 0.0;
      for (std::size_t j = 1; j <= K; ++j) {
        const auto interval = (j - 1) / topo.substeps;
        if (interval < T) acc += row[interval] / static_cast<double>(topo.substeps);
        curve[j] = acc;
      }
    }
    for (std::size_t j = 0; j <= K; ++j) {
      double s = 0.0;
      for (const auto& curve : dep_m[a]) s += curve[j];
      res.dep_[a][j] = s;
    }
  }

  std::vector<double> sending(n_links), receiving(n_links), src_sending(n_links);
  std::vector<double> sent(n_links), src_sent(n_links);
  // Movement demand per link and per outgoing column of its head node.
  std::vector<std::vector<double>> link_movement(n_links);
  for (std::size_t a = 0; a < n_links; ++a) {
    link_movement[a].assign(topo.nodes[topo.links[a].head].out_links.size() + 1, 0.0);
  }
  std::vector<double> node_movement, node_supply, out_ratio, ratio;

  for (std::size_t k = 0; k < K; ++k) {
    const double t = static_cast<double>(k) * dt;
    // Only samples up to k are final while step k is being resolved.
    auto prefix = [k, dt](const std::vector<double>& v) {
      return CurveView{std::span<const double>(v.data(), k + 1), dt};
    };

    for (std::size_t a = 0; a < n_links; ++a) {
      const auto& link = topo.links[a];
      const auto up = prefix(res.up_[a]);
      const auto dn = prefix(res.dn_[a]);
      sending[a] = link_demand(link, up, dn, t, dt) * dt;
      receiving[a] = link_supply(link, up, dn, t, dt) * dt;

      auto& mov = link_movement[a];
      std::fill(mov.begin(), mov.end(), 0.0);
      if (sending[a] > 0.0) {
        const double target = res.dn_[a][k] + sending[a];
        const double when = up.first_reach(target).value_or(t);
        double share_sum = 0.0;
        std::vector<double> shares(topo.members[a].size());
        for (std::size_t m = 0; m < shares.size(); ++m) {
          const double v = prefix(up_m[a][m]).at(when) - dn_m[a][m][k];
          shares[m] = v > 1e-12 * std::max(1.0, sending[a]) ? v : 0.0;
          share_sum += shares[m];
        }
        if (share_sum > 0.0) {
          for (std::size_t m = 0; m < shares.size(); ++m) {
            mov[topo.members[a][m].column] += sending[a] * shares[m] / share_sum;
          }
        } else {
          sending[a] = 0.0;
        }
      }
      src_sending[a] = 0.0;
      if (!topo.sources[a].empty()) {
        src_sending[a] = std::max(0.0, res.dep_[a][k + 1] - res.ent_[a][k]);
      }
    }

    for (const auto& node : topo.nodes) {
      const auto n_out = node.out_links.size() + 1;
      const auto n_in = node.in_links.size() + node.src_links.size();
      if (n_in == 0) continue;
      node_movement.assign(n_in * n_out, 0.0);
      node_supply.assign(n_out, std::numeric_limits<double>::infinity());
      out_ratio.assign(n_out, 1.0);
      ratio.assign(n_in, 1.0);
      for (std::size_t b = 0; b + 1 < n_out; ++b) node_supply[b] = receiving[node.out_links[b]];
      std::size_t row = 0;
      for (const auto a : node.in_links) {
        std::copy(link_movement[a].begin(), link_movement[a].end(),
                  node_movement.begin() + static_cast<std::ptrdiff_t>(row * n_out));
        ++row;
      }
      for (const auto a : node.src_links) {
        const auto col = static_cast<std::size_t>(
            std::find(node.out_links.begin(), node.out_links.end(), a) - node.out_links.begin());
        node_movement[row * n_out + col] = src_sending[a];
        ++row;
      }
      restriction(node_movement, n_in, n_out, node_supply, out_ratio, ratio);
      row = 0;
      for (const auto a : node.in_links) sent[a] = ratio[row++] * sending[a];
      for (const auto a : node.src_links) src_sent[a] = ratio[row++] * src_sending[a];
    }

    for (std::size_t a = 0; a < n_links; ++a) {
      for (std::size_t m = 0; m < up_m[a].size(); ++m) up_m[a][m][k + 1] = up_m[a][m][k];
    }
    for (std::size_t a = 0; a < n_links; ++a) {
      const auto& members = topo.members[a];
      const double target = res.dn_[a][k] + sent[a];
      const double when = prefix(res.up_[a]).first_reach(target).value_or(t);
      double total_dn = 0.0;
      for (std::size_t m = 0; m < members.size(); ++m) {
        double v = sent[a] > 0.0 ? prefix(up_m[a][m]).at(when) : dn_m[a][m][k];
        v = std::clamp(v, dn_m[a][m][k], std::max(dn_m[a][m][k], up_m[a][m][k]));
        dn_m[a][m][k + 1] = v;
        total_dn += v;
        const double moved = v - dn_m[a][m][k];
        if (moved == 0.0) continue;
        if (members[m].next_link == kSink) {
          res.sink_[topo.link_destination[a]] += moved;
        } else {
          up_m[members[m].next_link][members[m].next_slot][k + 1] += moved;
        }
      }
      res.dn_[a][k + 1] = total_dn;
    }
    for (std::size_t a = 0; a < n_links; ++a) {
      if (topo.sources[a].empty()) continue;
      const auto& src = topo.sources[a];
      const double target = res.ent_[a][k] + src_sent[a];
      const CurveView dep{res.dep_[a], dt};
      const double when = dep.first_reach(target).value_or(t + dt);
      double total_ent = 0.0;
      for (std::size_t s = 0; s < src.size(); ++s) {
        const double before = ent_m[a][s][k];
        double v = src_sent[a] > 0.0 ? CurveView{dep_m[a][s], dt}.at(when) : before;
        v = std::clamp(v, before, std::max(before, dep_m[a][s][k + 1]));
        ent_m[a][s][k + 1] = v;
        total_ent += v;
        up_m[a][topo.first_member[src[s]]][k + 1] += v - before;
      }
      res.ent_[a][k + 1] = total_ent;
      const double queue = res.dep_[a][k + 1] - total_ent;
      if (queue > max_source_queue_) {
        throw ModelError("origin queue for link " + topo.links[a].id + " exceeds " +
                         std::to_string(max_source_queue_) + " vehicles");
      }
    }
    for (std::size_t a = 0; a < n_links; ++a) {
      double s = 0.0;
      for (const auto& curve : up_m[a]) s += curve[k + 1];
      res.up_[a][k + 1] = std::max(s, res.up_[a][k]);
    }
  }

  res.link_times_ = Matrix(n_links, T);
  for (std::size_t a = 0; a < n_links; ++a) {
    for (std::size_t t = 0; t < T; ++t) {
      const double entry = grid_.representative(t);
      res.link_times_(a, t) = res.link_travel_time(a, entry);
    }
  }
  res.path_times_ = Matrix(n_paths, T);
  res.extrapolated_.assign(n_paths * T, 0);
  for (std::size_t p = 0; p < n_paths; ++p) {
    for (std::size_t t = 0; t < T; ++t) {
      bool flag = false;
      res.path_times_(p, t) = res.path_travel_time(p, grid_.representative(t), &flag);
      res.extrapolated_[p * T + t] = flag ? 1 : 0;
    }
  }
  return res;
}

CurveView LoadingResult::departures(std::size_t link) const { return {dep_.at(link), step_}; }
CurveView LoadingResult::entered(std::size_t link) const { return {ent_.at(link), step_}; }

bool LoadingResult::extrapolated(std::size_t path, std::size_t interval) const {
  return extrapolated_.at(path * path_times_.cols() + interval) != 0;
}

std::size_t LoadingResult::extrapolated_count() const noexcept {
  return static_cast<std::size_t>(std::count(extrapolated_.begin(), extrapolated_.end(), 1));
}

double LoadingResult::exit_time(std::size_t a, double entry, bool& extrapolated) const {
  const auto& link = topo_->links[a];
  const auto& dn = dn_[a];
  const CurveView up{up_[a], step_};
  const double ff = link.free_flow_time();
  const double count = up.at(entry);
  const double target = count - count_tolerance(count);
  const double earliest = entry + ff;

  const auto it = std::lower_bound(dn.begin(), dn.end(), target);
  if (it == dn.end()) {
    extrapolated = true;
    const auto K = dn.size() - 1;
    const double rate = K > 0 ? (dn[K] - dn[K - 1]) / step_ : 0.0;
    const double r = rate > 1e-12 ? rate : link.capacity;
    return std::max(earliest, end_time() + (target - dn[K]) / r);
  }
  const auto j = static_cast<std::size_t>(it - dn.begin());
  if (j == 0) return earliest;
  const double t0 = static_cast<double>(j - 1) * step_;
  const double t1 = static_cast<double>(j) * step_;
  const double q0 = up.at(t0 - ff) - dn[j - 1];
  const double q1 = up.at(t1 - ff) - dn[j];
  const double via_arrival = up.first_reach(target).value_or(entry) + ff;
  double reach = 0.0;
  if (q0 <= queue_tolerance(dn[j - 1]) && q1 <= queue_tolerance(dn[j])) {
    // No queue at either end of the step: the exit curve is the shifted entry curve.
    reach = clamp_time(via_arrival, t0, t1);
  } else {
    const double lo = dn[j - 1];
    const double hi = dn[j];
    const double via_discharge = t0 + step_ * (hi > lo ? (target - lo) / (hi - lo) : 1.0);
    reach = clamp_time(std::max(via_arrival, via_discharge), t0, t1);
  }
  return std::max(earliest, reach);
}

double LoadingResult::link_travel_time(std::size_t link, double entry) const {
  bool flag = false;
  return exit_time(link, entry, flag) - entry;
}

double LoadingResult::path_travel_time(std::size_t path, double departure,
                                       bool* extrapolated) const {
  const auto& links = topo_->path_links.at(path);
  bool flag = false;
  const auto first = links.front();
  const CurveView dep{dep_[first], step_};
  const CurveView ent{ent_[first], step_};
  const double count = dep.at(departure);
  const double target = count - count_tolerance(count);
  double clock = departure;
  if (const auto reach = ent.first_reach(target)) {
    clock = std::max(departure, *reach);
  } else {
    flag = true;
    const auto K = ent_[first].size() - 1;
    const double rate = K > 0 ? (ent_[first][K] - ent_[first][K - 1]) / step_ : 0.0;
    const double r = rate > 1e-12 ? rate : topo_->links[first].capacity;
    clock = std::max(departure, end_time() + (target - ent_[first][K]) / r);
  }
  for (const auto a : links) clock = exit_time(a, clock, flag);
  if (extrapolated) *extrapolated = flag;
  return clock - departure;
}

std::vector<double> LoadingResult::instantaneous_path_times(std::size_t interval) const {
  std::vector<double> out(topo_->path_links.size(), 0.0);
  for (std::size_t p = 0; p < out.size(); ++p) {
    double s = 0.0;
    for (const auto a : topo_->path_links[p]) s += link_times_(a, interval);
    out[p] = s;
  }
  return out;
}

double LoadingResult::arrived() const noexcept {
  double s = 0.0;
  for (double v : sink_) s += v;
  return s;
}

double LoadingResult::departed() const noexcept {
  double s = 0.0;
  for (const auto& d : dep_) {
    if (!d.empty()) s += d.back();
  }
  return s;
}

double LoadingResult::stored() const noexcept {
  double s = 0.0;
  for (std::size_t a = 0; a < up_.size(); ++a) {
    s += up_[a].back() - dn_[a].back();
    if (!dep_[a].empty()) s += dep_[a].back() - ent_[a].back();
  }
  return s;
}

}  // namespace dsuedhi

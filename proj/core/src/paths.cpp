#include "dsuedhi/paths.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <string>

#include "dsuedhi/error.hpp"

namespace dsuedhi {

namespace {

constexpr double kTieTolerance = 1e-9;
constexpr std::size_t kMaxGenerated = 100000;

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= kTieTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

bool path_order(const Path& a, const Path& b) {
  if (!nearly_equal(a.free_flow_time, b.free_flow_time)) return a.free_flow_time < b.free_flow_time;
  return a.links < b.links;
}

struct Restriction {
  std::vector<char> banned_links;
  std::vector<char> banned_nodes;
};

/// Dijkstra from `from` to `to` over link weights; ties resolved towards the
/// lower link index so the result is deterministic.
std::optional<std::vector<std::size_t>> shortest(const Network& net, std::size_t from,
                                                 std::size_t to,
                                                 const std::function<double(const Link&)>& weight,
                                                 const Restriction* r) {
  const auto n = net.nodes().size();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> via(n, std::numeric_limits<std::size_t>::max());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[from] = 0.0;
  heap.emplace(0.0, from);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    if (u == to) break;
    for (const auto a : net.out_links(u)) {
      if (r && r->banned_links[a]) continue;
      const auto& link = net.link(a);
      if (r && r->banned_nodes[link.head]) continue;
      const double nd = d + weight(link);
      if (nd < dist[link.head]) {
        dist[link.head] = nd;
        via[link.head] = a;
        heap.emplace(nd, link.head);
      }
    }
  }
  if (!std::isfinite(dist[to])) return std::nullopt;
  std::vector<std::size_t> links;
  for (auto v = to; v != from;) {
    const auto a = via[v];
    links.push_back(a);
    v = net.link(a).tail;
  }
  std::reverse(links.begin(), links.end());
  return links;
}

}  // namespace

Path make_path(const Network& net, std::size_t od, std::vector<std::size_t> links) {
  Path p;
  p.od = od;
  for (const auto a : links) {
    const auto& l = net.link(a);
    p.free_flow_time += l.free_flow_time();
    p.length += l.length;
  }
  p.links = std::move(links);
  return p;
}

PathSet::PathSet(const Network& net, std::vector<Path> paths) {
  const auto n_od = net.ods().size();
  std::stable_sort(paths.begin(), paths.end(),
                   [](const Path& a, const Path& b) { return a.od < b.od; });
  begin_.assign(n_od, 0);
  end_.assign(n_od, 0);
  for (const auto& p : paths) {
    if (p.od >= n_od) throw ValidationError("path refers to unknown OD index");
    if (p.links.empty()) throw ValidationError("empty path for OD " + net.od_label(p.od));
    const auto& od = net.od(p.od);
    std::vector<char> visited(net.nodes().size(), 0);
    std::size_t node = od.origin;
    visited[node] = 1;
    for (const auto a : p.links) {
      const auto& l = net.link(a);
      if (l.tail != node) throw ValidationError("non-contiguous path for OD " + net.od_label(p.od));
      node = l.head;
      if (visited[node]) throw ValidationError("cyclic path for OD " + net.od_label(p.od));
      visited[node] = 1;
    }
    if (node != od.destination) {
      throw ValidationError("path does not end at destination of OD " + net.od_label(p.od));
    }
  }
  std::size_t idx = 0;
  for (std::size_t w = 0; w < n_od; ++w) {
    begin_[w] = idx;
    while (idx < paths.size() && paths[idx].od == w) ++idx;
    end_[w] = idx;
    if (begin_[w] == end_[w]) throw ValidationError("no path for OD " + net.od_label(w));
  }
  paths_ = std::move(paths);
}

std::vector<Path> enumerate_paths(const Network& net, std::size_t od_index,
                                  const PathOptions& opts) {
  if (opts.k_max < 1) throw ValidationError("k_max must be at least 1");
  if (!(opts.time_ratio >= 1.0) || !(opts.length_ratio >= 1.0)) {
    throw ValidationError("path ratios must be at least 1");
  }
  const auto& od = net.od(od_index);
  const auto by_time = [](const Link& l) { return l.free_flow_time(); };
  const auto by_length = [](const Link& l) { return l.length; };

  auto first = shortest(net, od.origin, od.destination, by_time, nullptr);
  const auto shortest_len = shortest(net, od.origin, od.destination, by_length, nullptr);
  if (!first || !shortest_len) {
    throw ValidationError("no feasible path for OD " + net.od_label(od_index));
  }
  const double min_length = make_path(net, od_index, *shortest_len).length;

  std::vector<Path> found{make_path(net, od_index, std::move(*first))};
  const double time_bound = opts.time_ratio * found.front().free_flow_time;
  const double length_bound = opts.length_ratio * min_length;
  auto within = [](double v, double bound) {
    return v <= bound || nearly_equal(v, bound);
  };

  auto candidate_less = [](const Path& a, const Path& b) { return path_order(a, b); };
  std::set<Path, decltype(candidate_less)> candidates(candidate_less);
  std::set<std::vector<std::size_t>> seen{found.front().links};

  std::vector<Path> accepted;
  auto consider = [&](const Path& p) {
    if (within(p.free_flow_time, time_bound) && within(p.length, length_bound)) {
      accepted.push_back(p);
    }
  };
  consider(found.front());

  const auto n_nodes = net.nodes().size();
  const auto n_links = net.links().size();
  while (found.size() < kMaxGenerated) {
    const auto& last = found.back();
    // Spur from every node of the last path except the destination.
    std::size_t spur_node = od.origin;
    for (std::size_t i = 0; i < last.links.size(); ++i) {
      Restriction r{std::vector<char>(n_links, 0), std::vector<char>(n_nodes, 0)};
      const std::vector<std::size_t> root(last.links.begin(), last.links.begin() + i);
      for (const auto& p : found) {
        if (p.links.size() > i && std::equal(root.begin(), root.end(), p.links.begin())) {
          r.banned_links[p.links[i]] = 1;
        }
      }
      std::size_t v = od.origin;
      for (const auto a : root) {
        r.banned_nodes[v] = 1;
        v = net.link(a).head;
      }
      if (auto spur = shortest(net, spur_node, od.destination, by_time, &r)) {
        std::vector<std::size_t> links = root;
        links.insert(links.end(), spur->begin(), spur->end());
        if (seen.insert(links).second) candidates.insert(make_path(net, od_index, links));
      }
      spur_node = net.link(last.links[i]).head;
    }
    if (candidates.empty()) break;
    Path next = *candidates.begin();
    candidates.erase(candidates.begin());
    if (!within(next.free_flow_time, time_bound)) break;
    if (accepted.size() >= opts.k_max) {
      std::sort(accepted.begin(), accepted.end(), path_order);
      if (!nearly_equal(next.free_flow_time, accepted[opts.k_max - 1].free_flow_time) &&
          next.free_flow_time > accepted[opts.k_max - 1].free_flow_time) {
        break;
      }
    }
    consider(next);
    found.push_back(std::move(next));
  }

  std::sort(accepted.begin(), accepted.end(), path_order);
  if (accepted.size() > opts.k_max) accepted.resize(opts.k_max);
  if (accepted.empty() && od.demand() > 0.0) {
    throw ValidationError("no feasible path for OD " + net.od_label(od_index));
  }
  return accepted;
}

PathSet enumerate_all_paths(const Network& net, const PathOptions& opts) {
  std::vector<Path> all;
  for (std::size_t w = 0; w < net.ods().size(); ++w) {
    auto paths = enumerate_paths(net, w, opts);
    all.insert(all.end(), std::make_move_iterator(paths.begin()),
               std::make_move_iterator(paths.end()));
  }
  return PathSet(net, std::move(all));
}

Matrix incidence_matrix(const Network& net, const PathSet& paths) {
  Matrix delta(net.links().size(), paths.size());
  for (std::size_t p = 0; p < paths.size(); ++p) {
    for (const auto a : paths[p].links) delta(a, p) = 1.0;
  }
  return delta;
}

}  // namespace dsuedhi

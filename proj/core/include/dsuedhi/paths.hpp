#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dsuedhi/matrix.hpp"
#include "dsuedhi/network.hpp"

namespace dsuedhi {

struct Path {
  std::size_t od = 0;
  std::vector<std::size_t> links;
  double free_flow_time = 0.0;  // s
  double length = 0.0;          // m
};

struct PathOptions {
  std::size_t k_max = 5;
  double time_ratio = 1.5;
  double length_ratio = 1.5;
};

/// All paths of the network, grouped by OD pair: paths of OD w occupy the
/// contiguous index range [begin(w), end(w)).
class PathSet {
 public:
  PathSet() = default;
  /// Takes paths in any order; regroups them by OD (stable within an OD) and
  /// checks contiguity, acyclicity and endpoints. Every OD must own a path.
  PathSet(const Network& net, std::vector<Path> paths);

  std::size_t size() const noexcept { return paths_.size(); }
  std::size_t od_count() const noexcept { return begin_.size(); }
  const Path& operator[](std::size_t p) const { return paths_.at(p); }
  std::span<const Path> paths() const noexcept { return paths_; }

  std::size_t begin(std::size_t od) const { return begin_.at(od); }
  std::size_t end(std::size_t od) const { return end_.at(od); }
  std::size_t count(std::size_t od) const { return end(od) - begin(od); }

 private:
  std::vector<Path> paths_;
  std::vector<std::size_t> begin_;
  std::vector<std::size_t> end_;
};

/// Builds a path from link indices, filling in the free-flow time and length.
Path make_path(const Network& net, std::size_t od, std::vector<std::size_t> links);

/// Up to k_max loopless paths for one OD whose free-flow time and length stay
/// within the given ratios of the respective shortest values. Found by
/// deviation from successive shortest paths (Yen) on free-flow time and
/// returned ordered by free-flow time, ties broken by link index sequence.
/// Throws ValidationError when the OD has positive demand and no feasible path.
std::vector<Path> enumerate_paths(const Network& net, std::size_t od, const PathOptions& opts);

PathSet enumerate_all_paths(const Network& net, const PathOptions& opts);

/// Link-path incidence: element (a, p) is 1 when path p uses link a.
Matrix incidence_matrix(const Network& net, const PathSet& paths);

}  // namespace dsuedhi

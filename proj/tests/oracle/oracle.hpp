#pragma once

// Independent reference computations used by the unit and acceptance
// suites. Nothing here calls into the library's algorithms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

// Cumulative-curve simulation at a fine, fixed step. Links are listed with
// tail and head node ids, paths as link index lists. Every path starts with
// an unbounded origin queue and ends in an unbounded sink.
struct Link {
  int tail = 0;
  int head = 0;
  double ff = 0.0;       // free-flow time (s)
  double bw = 0.0;       // backward-wave time (s)
  double cap = 0.0;      // veh/s
  double storage = 0.0;  // veh
};

class FineLoading {
 public:
  FineLoading(std::vector<Link> links, std::vector<std::vector<int>> paths, double step,
              std::size_t steps)
      : links_(std::move(links)), paths_(std::move(paths)), h_(step), K_(steps) {}

  // rates[p](t) is the departure rate of path p at clock time t.
  template <class Rate>
  void run(Rate rate) {
    const std::size_t L = links_.size(), P = paths_.size();
    up_.assign(L, std::vector<std::vector<double>>(P, std::vector<double>(K_ + 1, 0.0)));
    dn_ = up_;
    dep_.assign(P, std::vector<double>(K_ + 1, 0.0));
    ent_ = dep_;
    for (std::size_t k = 0; k < K_; ++k) {
      const double t = h_ * static_cast<double>(k);
      for (std::size_t p = 0; p < P; ++p) {
        // Midpoint rule: exact while rate changes fall on step boundaries.
        dep_[p][k + 1] = dep_[p][k] + h_ * rate(p, t + 0.5 * h_);
      }
      // Sending: per-path composition of vehicles that have reached the exit.
      std::vector<std::vector<double>> send(L, std::vector<double>(P, 0.0));
      std::vector<double> send_total(L, 0.0), recv(L, 0.0);
      for (std::size_t a = 0; a < L; ++a) {
        const auto tot_up = total(up_[a]);
        const auto tot_dn = total(dn_[a]);
        const double arrived = interp(tot_up, t + h_ - links_[a].ff);
        const double s = std::max(0.0, std::min(links_[a].cap * h_, arrived - tot_dn[k]));
        send_total[a] = s;
        if (s > 0) {
          const double tau = invert(tot_up, tot_dn[k] + s, k);
          for (std::size_t p = 0; p < P; ++p) {
            send[a][p] = std::max(0.0, interp(up_[a][p], tau) - dn_[a][p][k]);
          }
          const double sum = sum_of(send[a]);
          if (sum > 0) {
            for (auto& v : send[a]) v *= s / sum;
          }
        }
        const double freed = interp(tot_dn, t + h_ - links_[a].bw);
        recv[a] = std::max(0.0, std::min(links_[a].cap * h_,
                                         freed + links_[a].storage - tot_up[k]));
      }
      // Demand of each incoming "entity" toward each outgoing link. Entities
      // are real links (index a) and origin queues (index L + p).
      std::map<int, double> out_demand;  // outgoing link -> total demand
      auto next_of = [&](std::size_t p, int a) {
        const auto& pl = paths_[p];
        for (std::size_t i = 0; i + 1 < pl.size(); ++i) {
          if (pl[i] == a) return pl[i + 1];
        }
        return -1;
      };
      std::vector<std::vector<double>> src_send(P, std::vector<double>(1, 0.0));
      for (std::size_t p = 0; p < P; ++p) {
        src_send[p][0] = dep_[p][k + 1] - ent_[p][k];
      }
      std::vector<double> demand_to(L, 0.0);
      for (std::size_t a = 0; a < L; ++a) {
        for (std::size_t p = 0; p < P; ++p) {
          const int b = next_of(p, static_cast<int>(a));
          if (b >= 0) demand_to[b] += send[a][p];
        }
      }
      for (std::size_t p = 0; p < P; ++p) demand_to[paths_[p][0]] += src_send[p][0];
      std::vector<double> ratio(L, 1.0);
      for (std::size_t b = 0; b < L; ++b) {
        if (demand_to[b] > recv[b]) ratio[b] = demand_to[b] > 0 ? recv[b] / demand_to[b] : 1.0;
      }
      // FIFO: each link sends at the tightest ratio over the branches it feeds.
      for (std::size_t a = 0; a < L; ++a) {
        double phi = 1.0;
        for (std::size_t p = 0; p < P; ++p) {
          if (send[a][p] <= 0) continue;
          const int b = next_of(p, static_cast<int>(a));
          if (b >= 0) phi = std::min(phi, ratio[b]);
        }
        for (std::size_t p = 0; p < P; ++p) {
          const double f = phi * send[a][p];
          dn_[a][p][k + 1] = dn_[a][p][k] + f;
          const int b = next_of(p, static_cast<int>(a));
          if (b >= 0) pending_[{b, p}] += f;
        }
      }
      // Origin queues share each first link's ratio.
      for (std::size_t p = 0; p < P; ++p) {
        const double f = ratio[paths_[p][0]] * src_send[p][0];
        ent_[p][k + 1] = ent_[p][k] + f;
        pending_[{paths_[p][0], p}] += f;
      }
      for (std::size_t a = 0; a < L; ++a) {
        for (std::size_t p = 0; p < P; ++p) {
          auto it = pending_.find({static_cast<int>(a), p});
          const double f = it == pending_.end() ? 0.0 : it->second;
          up_[a][p][k + 1] = up_[a][p][k] + f;
        }
      }
      pending_.clear();
    }
  }

  // Travel time of path p for a vehicle departing at clock time s: follow
  // its cumulative count to the end of the last link.
  double path_time(std::size_t p, double s) const {
    const double n = interp(dep_[p], s);
    const int last = paths_[p].back();
    return invert(dn_[last][p], n, K_) - s;
  }

  double link_in(std::size_t a) const {
    double s = 0;
    for (const auto& c : up_[a]) s += c.back();
    return s;
  }
  double link_out(std::size_t a) const {
    double s = 0;
    for (const auto& c : dn_[a]) s += c.back();
    return s;
  }

 private:
  std::vector<double> total(const std::vector<std::vector<double>>& per_path) const {
    std::vector<double> t(K_ + 1, 0.0);
    for (const auto& c : per_path) {
      for (std::size_t k = 0; k <= K_; ++k) t[k] += c[k];
    }
    return t;
  }
  static double sum_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s;
  }
  double interp(const std::vector<double>& c, double t) const {
    if (t <= 0) return c[0];
    const double x = t / h_;
    const auto i = static_cast<std::size_t>(x);
    if (i >= K_) return c[K_];
    const double f = x - static_cast<double>(i);
    return c[i] + f * (c[i + 1] - c[i]);
  }
  // First time the curve reaches n (within a hair), linear inside a step.
  // Only samples 0..upto are looked at.
  double invert(const std::vector<double>& c, double n, std::size_t upto) const {
    const double tol = 1e-12 * std::max(1.0, std::abs(n));
    if (c[upto] < n - tol) return std::numeric_limits<double>::infinity();
    const auto it = std::lower_bound(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(upto) + 1,
                                     n - tol);
    const auto i = static_cast<std::size_t>(it - c.begin());
    if (i == 0) return 0.0;
    const double lo = c[i - 1], hi = c[i];
    const double f = hi > lo ? std::clamp((n - lo) / (hi - lo), 0.0, 1.0) : 1.0;
    return h_ * (static_cast<double>(i - 1) + f);
  }

  std::vector<Link> links_;
  std::vector<std::vector<int>> paths_;
  double h_;
  std::size_t K_;
  std::vector<std::vector<std::vector<double>>> up_, dn_;
  std::vector<std::vector<double>> dep_, ent_;
  std::map<std::pair<int, std::size_t>, double> pending_;
};

// All simple paths from `from` to `to` over directed edges (tail, head),
// found by depth-first search. Each path is a list of edge indices.
inline std::vector<std::vector<int>> all_simple_paths(
    const std::vector<std::pair<int, int>>& edges, int from, int to) {
  std::vector<std::vector<int>> out;
  std::vector<int> stack;
  std::set<int> visited{from};
  auto dfs = [&](auto&& self, int node) -> void {
    if (node == to) {
      out.push_back(stack);
      return;
    }
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
      if (edges[e].first != node || visited.count(edges[e].second)) continue;
      visited.insert(edges[e].second);
      stack.push_back(e);
      self(self, edges[e].second);
      stack.pop_back();
      visited.erase(edges[e].second);
    }
  };
  dfs(dfs, from);
  return out;
}

// Logit shares by the textbook formula, no shifting.
inline std::vector<double> logit(const std::vector<double>& v, double theta) {
  std::vector<double> e(v.size());
  double s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) s += (e[i] = std::exp(-theta * v[i]));
  for (auto& x : e) x /= s;
  return e;
}

// Disutility written out directly, all times in seconds, unit in seconds.
inline double disutility(double tt, double dep, double ta, double mu1, double mu2, double unit) {
  const double gap = (dep + tt - ta) / unit;
  return tt / unit + (gap < 0 ? mu1 : mu2) * gap * gap;
}

// Spearman rank correlation of two equally long samples without ties.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double d2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

}  // namespace oracle

#pragma once

// Exhaustive reference computations for small lattices. These never call the
// library's search routines; they only read edge weights from the lattice.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "lfpp/lattice.hpp"

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Graph {
  int n = 0;
  std::vector<std::vector<std::pair<int, double>>> adj;
  std::vector<lfpp::Point> pos;
  double min_weight = kInf;
};

// Lattice restricted to `member` vertices.
inline Graph restrict(const lfpp::WeightedLattice& lat, const std::vector<bool>& member) {
  Graph g;
  g.n = lat.vertex_count();
  g.adj.resize(g.n);
  g.pos.resize(g.n);
  const int side = lat.spec().n_cells;
  for (int v = 0; v < g.n; ++v) {
    g.pos[v] = lat.position(v);
    if (!member[v]) continue;
    const int x = v % side, y = v / side;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        if (lat.connectivity() == lfpp::Connectivity::four && dx != 0 && dy != 0) continue;
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= side || ny >= side) continue;
        const int u = ny * side + nx;
        if (!member[u]) continue;
        const double w = lat.weight(v, u);
        g.adj[v].emplace_back(u, w);
        g.min_weight = std::min(g.min_weight, w);
      }
  }
  return g;
}

// Minimum over all simple paths from any source to any target, by depth-first
// enumeration. Branches are cut only when their partial weight plus an
// admissible lower bound already reaches the incumbent.
class PathEnumerator {
 public:
  PathEnumerator(const Graph& g, std::vector<int> sources, std::vector<int> targets)
      : g_(g), sources_(std::move(sources)), is_target_(g.n, false), on_path_(g.n, false) {
    for (int t : targets) is_target_[t] = true, targets_.push_back(t);
  }

  double run() {
    for (int s : sources_) {
      on_path_[s] = true;
      dfs(s, 0.0);
      on_path_[s] = false;
    }
    return best_;
  }

 private:
  double lower_bound(int v) const {
    double hops = kInf;
    for (int t : targets_) {
      const lfpp::Point d = (g_.pos[t] - g_.pos[v]);
      const double steps = std::max(std::abs(d.x()), std::abs(d.y()));
      hops = std::min(hops, steps);
    }
    if (hops == kInf || g_.min_weight == kInf) return 0.0;
    const double spacing = g_.pos.size() > 1 ? (g_.pos[1] - g_.pos[0]).norm() : 1.0;
    return g_.min_weight * std::floor(hops / spacing + 1e-9);
  }

  void dfs(int v, double acc) {
    if (is_target_[v]) {
      best_ = std::min(best_, acc);
      return;
    }
    if (acc + lower_bound(v) >= best_) return;
    auto edges = g_.adj[v];
    std::sort(edges.begin(), edges.end(), [](auto& a, auto& b) { return a.second < b.second; });
    for (auto [u, w] : edges) {
      if (on_path_[u]) continue;
      on_path_[u] = true;
      dfs(u, acc + w);
      on_path_[u] = false;
    }
  }

  const Graph& g_;
  std::vector<int> sources_;
  std::vector<int> targets_;
  std::vector<bool> is_target_;
  std::vector<bool> on_path_;
  double best_ = kInf;
};

inline double min_simple_path(const Graph& g, std::vector<int> sources, std::vector<int> targets) {
  return PathEnumerator(g, std::move(sources), std::move(targets)).run();
}

// All-pairs shortest paths by Floyd-Warshall (second, algebraic route).
inline std::vector<std::vector<double>> floyd_warshall(const Graph& g) {
  std::vector<std::vector<double>> d(g.n, std::vector<double>(g.n, kInf));
  for (int v = 0; v < g.n; ++v) {
    d[v][v] = 0.0;
    for (auto [u, w] : g.adj[v]) d[v][u] = std::min(d[v][u], w);
  }
  for (int k = 0; k < g.n; ++k)
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

inline int winding(const Graph& g, const std::vector<int>& cycle, const lfpp::Point& c) {
  double total = 0;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const lfpp::Point a = g.pos[cycle[i]] - c;
    const lfpp::Point b = g.pos[cycle[(i + 1) % cycle.size()]] - c;
    total += std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
  }
  return static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
}

// Minimum weight simple cycle (length >= 3) winding around `center`, by
// enumerating every simple cycle from its smallest vertex.
class CycleEnumerator {
 public:
  CycleEnumerator(const Graph& g, lfpp::Point center)
      : g_(g), center_(center), on_path_(g.n, false) {}

  double run() {
    for (int s = 0; s < g_.n; ++s) {
      if (g_.adj[s].empty()) continue;
      start_ = s;
      path_ = {s};
      on_path_[s] = true;
      dfs(s, 0.0);
      on_path_[s] = false;
    }
    return best_;
  }

 private:
  void dfs(int v, double acc) {
    if (acc >= best_) return;
    for (auto [u, w] : g_.adj[v]) {
      if (u == start_ && path_.size() >= 3) {
        if (acc + w < best_ && winding(g_, path_, center_) != 0) best_ = acc + w;
        continue;
      }
      if (u <= start_ || on_path_[u]) continue;
      on_path_[u] = true;
      path_.push_back(u);
      dfs(u, acc + w);
      path_.pop_back();
      on_path_[u] = false;
    }
  }

  const Graph& g_;
  lfpp::Point center_;
  std::vector<bool> on_path_;
  std::vector<int> path_;
  int start_ = 0;
  double best_ = kInf;
};

inline double min_separating_cycle(const Graph& g, const lfpp::Point& center) {
  return CycleEnumerator(g, center).run();
}

// Membership helpers mirroring the library's half-step conventions, written
// out independently.
inline std::vector<bool> annulus_members(const lfpp::WeightedLattice& lat,
                                         const lfpp::AnnulusSpec& a) {
  std::vector<bool> m(lat.vertex_count());
  const double half = 0.5 * lat.spec().spacing;
  for (int v = 0; v < lat.vertex_count(); ++v) {
    const double d = (lat.position(v) - a.center).norm();
    m[v] = d >= a.r_inner - half && d <= a.r_outer + half;
  }
  return m;
}

inline std::vector<int> ring(const lfpp::WeightedLattice& lat, const lfpp::Point& c, double r) {
  std::vector<int> out;
  const double half = 0.5 * lat.spec().spacing;
  for (int v = 0; v < lat.vertex_count(); ++v)
    if (std::abs((lat.position(v) - c).norm() - r) <= half) out.push_back(v);
  return out;
}

// Flood fill in the complementary connectivity (4 for an 8-neighbour lattice
// and vice versa) from `from`, avoiding `removed`; true if any of `to` is hit.
inline bool connected_avoiding(const lfpp::WeightedLattice& lat, const std::vector<int>& from,
                               const std::vector<int>& to, const std::vector<bool>& removed) {
  const int side = lat.spec().n_cells;
  const bool diag = lat.connectivity() == lfpp::Connectivity::four;
  std::vector<bool> seen(lat.vertex_count(), false), goal(lat.vertex_count(), false);
  for (int t : to) goal[t] = true;
  std::vector<int> stack;
  for (int s : from)
    if (!removed[s] && !seen[s]) seen[s] = true, stack.push_back(s);
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (goal[v]) return true;
    const int x = v % side, y = v / side;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if ((dx == 0 && dy == 0) || (!diag && dx != 0 && dy != 0)) continue;
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= side || ny >= side) continue;
        const int u = ny * side + nx;
        if (removed[u] || seen[u]) continue;
        seen[u] = true;
        stack.push_back(u);
      }
  }
  return false;
}

}  // namespace oracle

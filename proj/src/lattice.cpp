#include "lfpp/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "lfpp/error.hpp"

namespace lfpp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Label-setting search state, reused across calls on one thread. Entries
// are valid only when stamp == generation, so no O(V) reset per search.
struct SearchState {
  std::vector<double> dist;
  std::vector<int> parent;
  std::vector<std::uint32_t> stamp;
  std::uint32_t generation = 0;

  void begin(std::size_t states) {
    if (dist.size() < states) {
      dist.resize(states);
      parent.resize(states);
      stamp.resize(states, 0);
    }
    if (++generation == 0) {
      std::fill(stamp.begin(), stamp.end(), 0);
      generation = 1;
    }
  }
  double get(int s) const { return stamp[s] == generation ? dist[s] : kInf; }
  void set(int s, double d, int p) {
    stamp[s] = generation;
    dist[s] = d;
    parent[s] = p;
  }
  std::vector<int> trace(int s) const {
    std::vector<int> out;
    for (; s >= 0; s = parent[s]) out.push_back(s);
    std::reverse(out.begin(), out.end());
    return out;
  }
};

SearchState& thread_state() {
  thread_local SearchState state;
  return state;
}

// Binary-heap Dijkstra. Ties in distance are broken by the smaller state
// index. Returns the first target state settled, or -1. States whose label
// reaches `bound` are never expanded.
template <typename Neighbors, typename IsTarget>
int dijkstra(SearchState& st, std::size_t states, std::span<const int> sources, Neighbors&& nb,
             IsTarget&& is_target, double bound = kInf) {
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  st.begin(states);
  for (int s : sources) {
    if (st.get(s) > 0.0) {
      st.set(s, 0.0, -1);
      heap.emplace(0.0, s);
    }
  }
  while (!heap.empty()) {
    const auto [d, s] = heap.top();
    heap.pop();
    if (d > st.get(s)) continue;
    if (d >= bound) return -1;
    if (is_target(s)) return s;
    nb(s, [&](int next, double w) {
      const double nd = d + w;
      if (nd < st.get(next)) {
        st.set(next, nd, s);
        heap.emplace(nd, next);
      }
    });
  }
  return -1;
}

DistanceMeta meta_of(const WeightedLattice& lat) { return {lat.xi(), lat.epsilon(), lat.seed()}; }

void require_inside(const GridSpec& spec, const Point& p, const char* what) {
  require(p.allFinite() && spec.inside_interior(p),
          std::string(what) + ": point outside the unpadded domain");
}

DistanceResult run_set_search(const WeightedLattice& lat, std::span<const int> sources,
                              std::span<const int> targets, const Region& region,
                              DistanceKind kind) {
  DistanceResult res;
  res.kind = kind;
  res.meta = meta_of(lat);
  std::vector<int> src;
  for (int s : sources)
    if (region.contains(lat, s)) src.push_back(s);
  std::vector<int> tgt;
  for (int t : targets)
    if (region.contains(lat, t)) tgt.push_back(t);
  if (src.empty() || tgt.empty()) return res;
  std::sort(tgt.begin(), tgt.end());

  // Large target sets get a dense mask; small ones a sorted list, so local
  // queries on big grids stay O(explored).
  std::vector<std::uint8_t> dense;
  if (tgt.size() > 64) {
    dense.assign(static_cast<std::size_t>(lat.vertex_count()), 0);
    for (int t : tgt) dense[t] = 1;
  }
  const auto is_target = [&](int v) {
    return dense.empty() ? std::binary_search(tgt.begin(), tgt.end(), v) : dense[v] != 0;
  };

  auto& st = thread_state();
  const int hit = dijkstra(
      st, static_cast<std::size_t>(lat.vertex_count()), src,
      [&](int v, auto&& relax) {
        lat.for_each_neighbor(v, [&](int u, double w) {
          if (region.contains(lat, u)) relax(u, w);
        });
      },
      is_target);
  if (hit >= 0) {
    res.value = st.get(hit);
    res.path = st.trace(hit);
  }
  return res;
}

}  // namespace

WeightedLattice::WeightedLattice(const MollifiedField& source, double xi,
                                 Connectivity connectivity)
    : WeightedLattice(source.spec(), source.field.values, xi, connectivity, source.epsilon,
                      source.seed()) {}

WeightedLattice::WeightedLattice(const GridSpec& spec, const GridArray<double>& values, double xi,
                                 Connectivity connectivity, double epsilon, std::uint64_t seed)
    : spec_(spec), xi_(xi), connectivity_(connectivity), epsilon_(epsilon), seed_(seed) {
  spec_.validate();
  require(std::isfinite(xi) && xi > 0, "WeightedLattice: xi must be positive");
  require(values.rows() == spec.n_cells && values.cols() == spec.n_cells,
          "WeightedLattice: value array does not match grid");
  factor_.resize(static_cast<std::size_t>(vertex_count()));
  for (int iy = 0; iy < spec.n_cells; ++iy)
    for (int ix = 0; ix < spec.n_cells; ++ix) {
      const double f = std::exp(0.5 * xi * values(iy, ix));
      if (!std::isfinite(f) || f <= 0)
        throw PreconditionError("WeightedLattice: edge weights overflow or underflow");
      factor_[static_cast<std::size_t>(spec.index(ix, iy))] = f;
    }
}

int WeightedLattice::nearest_vertex(const Point& p) const {
  const auto [x, y] = spec_.nearest(p);
  return vertex(x, y);
}

double WeightedLattice::weight(int u, int v) const {
  double out = -1.0;
  for_each_neighbor(u, [&](int n, double w) {
    if (n == v) out = w;
  });
  if (out < 0) throw std::invalid_argument("WeightedLattice::weight: vertices are not adjacent");
  return out;
}

double WeightedLattice::summed_weight(std::span<const int> path) const {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) total += weight(path[i - 1], path[i]);
  return total;
}

Region Region::disk(const Disk& d) {
  Region r(Kind::disk);
  r.center_ = d.center;
  r.hi_ = d.radius;
  return r;
}

Region Region::annulus(const AnnulusSpec& a) {
  Region r(Kind::annulus);
  r.center_ = a.center;
  r.lo_ = a.r_inner;
  r.hi_ = a.r_outer;
  return r;
}

Region Region::square(const Square& s) {
  Region r(Kind::square);
  r.box_lo_ = s.corner;
  r.box_hi_ = s.corner + Point::Constant(s.side);
  return r;
}

Region Region::mask(std::vector<std::uint8_t> members) {
  Region r(Kind::mask);
  r.mask_ = std::move(members);
  return r;
}

bool Region::contains(const WeightedLattice& lat, int v) const {
  if (kind_ == Kind::whole) return true;
  if (kind_ == Kind::mask) return mask_[static_cast<std::size_t>(v)] != 0;
  const double half = 0.5 * lat.spec().spacing;
  const Point p = lat.position(v);
  switch (kind_) {
    case Kind::disk:
      return (p - center_).norm() <= hi_ + half;
    case Kind::annulus: {
      const double d = (p - center_).norm();
      return d >= lo_ - half && d <= hi_ + half;
    }
    case Kind::square:
      return p.x() >= box_lo_.x() - half && p.y() >= box_lo_.y() - half &&
             p.x() <= box_hi_.x() + half && p.y() <= box_hi_.y() + half;
    default:
      return false;
  }
}

std::vector<int> circle_vertices(const WeightedLattice& lat, const Point& c, double r) {
  const GridSpec& s = lat.spec();
  const double half = 0.5 * s.spacing;
  const Point lo = s.lattice_coords(c - Point::Constant(r + s.spacing));
  const Point hi = s.lattice_coords(c + Point::Constant(r + s.spacing));
  const int x0 = std::max(0, static_cast<int>(std::floor(lo.x())));
  const int y0 = std::max(0, static_cast<int>(std::floor(lo.y())));
  const int x1 = std::min(s.n_cells - 1, static_cast<int>(std::ceil(hi.x())));
  const int y1 = std::min(s.n_cells - 1, static_cast<int>(std::ceil(hi.y())));
  std::vector<int> out;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double d = (s.position(x, y) - c).norm();
      if (std::abs(d - r) <= half) out.push_back(lat.vertex(x, y));
    }
  return out;
}

void validate_annulus(const GridSpec& spec, const AnnulusSpec& a) {
  require(a.center.allFinite() && std::isfinite(a.r_inner) && std::isfinite(a.r_outer),
          "annulus: non-finite geometry");
  require(a.r_inner > 0 && a.r_inner < a.r_outer, "annulus: need 0 < r_inner < r_outer");
  require(spec.disk_inside_interior(a.center, a.r_outer),
          "annulus: outer disk leaves the unpadded domain");
  require(a.r_inner >= 2.0 * spec.spacing * (1.0 - 1e-12),
          "annulus: too thin to contain a full lattice ring (r_inner < 2 spacings)");
}

DistanceResult distance(const WeightedLattice& lat, const Point& z, const Point& w) {
  require_inside(lat.spec(), z, "distance");
  require_inside(lat.spec(), w, "distance");
  const int a = lat.nearest_vertex(z);
  const int b = lat.nearest_vertex(w);
  return run_set_search(lat, std::span<const int>(&a, 1), std::span<const int>(&b, 1),
                        Region::whole(), DistanceKind::point_point);
}

DistanceResult set_distance(const WeightedLattice& lat, std::span<const int> sources,
                            std::span<const int> targets, const Region& region) {
  return run_set_search(lat, sources, targets, region, DistanceKind::set_set);
}

DistanceResult distance_across(const WeightedLattice& lat, const AnnulusSpec& a) {
  validate_annulus(lat.spec(), a);
  const auto inner = circle_vertices(lat, a.center, a.r_inner);
  const auto outer = circle_vertices(lat, a.center, a.r_outer);
  return run_set_search(lat, inner, outer, Region::annulus(a), DistanceKind::across);
}

DistanceResult distance_around(const WeightedLattice& lat, const AnnulusSpec& a) {
  validate_annulus(lat.spec(), a);
  const Region band = Region::annulus(a);
  const GridSpec& s = lat.spec();

  // Bounding box of the band.
  const Point lo = s.lattice_coords(a.center - Point::Constant(a.r_outer + s.spacing));
  const Point hi = s.lattice_coords(a.center + Point::Constant(a.r_outer + s.spacing));
  const int x0 = std::max(0, static_cast<int>(std::floor(lo.x())));
  const int y0 = std::max(0, static_cast<int>(std::floor(lo.y())));
  const int x1 = std::min(s.n_cells - 1, static_cast<int>(std::ceil(hi.x())));
  const int y1 = std::min(s.n_cells - 1, static_cast<int>(std::ceil(hi.y())));

  const int n = lat.vertex_count();
  std::vector<std::uint8_t> in_band(static_cast<std::size_t>(n), 0);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (band.contains(lat, lat.vertex(x, y))) in_band[lat.vertex(x, y)] = 1;

  // The cut is the ray {y = c_y, x > c_x}; a vertex is "above" when y >= c_y.
  // Crossing an edge through the cut moves between the two copies of the
  // cut graph (state = 2 * vertex + copy).
  const auto above = [&](const Point& p) { return p.y() >= a.center.y(); };
  const auto crosses = [&](int u, int v) {
    const Point pu = lat.position(u);
    const Point pv = lat.position(v);
    if (above(pu) == above(pv)) return false;
    const double t = (a.center.y() - pu.y()) / (pv.y() - pu.y());
    return pu.x() + t * (pv.x() - pu.x()) > a.center.x();
  };

  std::vector<int> cut;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const int v = lat.vertex(x, y);
      if (!in_band[v] || !above(lat.position(v))) continue;
      bool is_cut = false;
      lat.for_each_neighbor(v, [&](int u, double) {
        if (in_band[u] && crosses(v, u)) is_cut = true;
      });
      if (is_cut) cut.push_back(v);
    }

  DistanceResult res;
  res.kind = DistanceKind::around;
  res.meta = meta_of(lat);
  auto& st = thread_state();
  double best = kInf;
  for (int c : cut) {
    const int start = 2 * c;
    const int goal = 2 * c + 1;
    const int hit = dijkstra(
        st, 2 * static_cast<std::size_t>(n), std::span<const int>(&start, 1),
        [&](int state, auto&& relax) {
          const int v = state >> 1;
          const int copy = state & 1;
          lat.for_each_neighbor(v, [&](int u, double w) {
            if (in_band[u]) relax(2 * u + (copy ^ (crosses(v, u) ? 1 : 0)), w);
          });
        },
        [&](int state) { return state == goal; }, best);
    if (hit >= 0 && st.get(hit) < best) {
      best = st.get(hit);
      std::vector<int> cycle;
      for (int state : st.trace(hit)) cycle.push_back(state >> 1);
      res.path = std::move(cycle);
    }
  }
  if (!res.path) throw PreconditionError("distance_around: no separating cycle at this resolution");
  res.value = best;
  // canonical form: start at the smallest vertex, walk towards its smaller neighbour
  auto& cyc = *res.path;
  cyc.pop_back();
  std::rotate(cyc.begin(), std::min_element(cyc.begin(), cyc.end()), cyc.end());
  if (cyc.size() > 2 && cyc[1] > cyc.back()) std::reverse(cyc.begin() + 1, cyc.end());
  cyc.push_back(cyc.front());
  const int winding = winding_number(lat, *res.path, a.center);
  if (winding % 2 == 0)
    throw std::logic_error("distance_around: returned cycle does not wind around the centre");
  return res;
}

DistanceResult internal_distance(const WeightedLattice& lat, const Point& z, const Point& w,
                                 const Region& region) {
  require_inside(lat.spec(), z, "internal_distance");
  require_inside(lat.spec(), w, "internal_distance");
  const int a = lat.nearest_vertex(z);
  const int b = lat.nearest_vertex(w);
  require(region.contains(lat, a) && region.contains(lat, b),
          "internal_distance: endpoints must lie in the region");
  return run_set_search(lat, std::span<const int>(&a, 1), std::span<const int>(&b, 1), region,
                        DistanceKind::internal);
}

DistanceResult left_right_crossing_cost(const WeightedLattice& lat, const Square& square) {
  const GridSpec& s = lat.spec();
  require(square.side > 0 && std::isfinite(square.side), "crossing: side must be positive");
  require(s.inside_interior(square.corner) &&
              s.inside_interior(square.corner + Point::Constant(square.side)),
          "crossing: square leaves the unpadded domain");
  const Region region = Region::square(square);
  int col_min = s.n_cells, col_max = -1;
  std::vector<int> members;
  const Point lo = s.lattice_coords(square.corner);
  const Point hi = s.lattice_coords(square.corner + Point::Constant(square.side));
  const int x0 = std::max(0, static_cast<int>(std::floor(lo.x())) - 1);
  const int y0 = std::max(0, static_cast<int>(std::floor(lo.y())) - 1);
  const int x1 = std::min(s.n_cells - 1, static_cast<int>(std::ceil(hi.x())) + 1);
  const int y1 = std::min(s.n_cells - 1, static_cast<int>(std::ceil(hi.y())) + 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (region.contains(lat, lat.vertex(x, y))) {
        members.push_back(lat.vertex(x, y));
        col_min = std::min(col_min, x);
        col_max = std::max(col_max, x);
      }
  require(col_max > col_min, "crossing: square narrower than one lattice step");
  std::vector<int> left, right;
  for (int v : members) {
    if (lat.ix(v) == col_min) left.push_back(v);
    if (lat.ix(v) == col_max) right.push_back(v);
  }
  return run_set_search(lat, left, right, region, DistanceKind::set_set);
}

DistanceResult distance_to_circle(const WeightedLattice& lat, const Point& z, double r) {
  require(lat.spec().disk_inside_interior(z, r), "distance_to_circle: disk leaves the domain");
  require(r >= 2.0 * lat.spec().spacing * (1.0 - 1e-12),
          "distance_to_circle: radius below the resolution floor");
  const int a = lat.nearest_vertex(z);
  const auto ring = circle_vertices(lat, z, r);
  return run_set_search(lat, std::span<const int>(&a, 1), ring, Region::disk({z, r}),
                        DistanceKind::set_set);
}

int winding_number(const WeightedLattice& lat, std::span<const int> cycle, const Point& center) {
  if (cycle.size() < 2) return 0;
  double total = 0.0;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const Point a = lat.position(cycle[i]) - center;
    const Point b = lat.position(cycle[(i + 1) % cycle.size()]) - center;
    total += std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

void write_geodesic(std::ostream& out, const WeightedLattice& lat, std::span<const int> path) {
  double cumulative = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) cumulative += lat.weight(path[i - 1], path[i]);
    const Point p = lat.position(path[i]);
    out << p.x() << ' ' << p.y() << ' ' << cumulative << '\n';
  }
}

}  // namespace lfpp

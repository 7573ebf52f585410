#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "lfpp/grid.hpp"
#include "lfpp/mollifier.hpp"

namespace lfpp {

enum class Connectivity { four, eight };

// Lattice graph on the vertices of a grid with LFPP edge weights
//   w(u, v) = |u - v| * exp(xi * (F(u) + F(v)) / 2),
// F the (mollified) field. Immutable after construction; concurrent queries
// are safe because all search state is per call.
class WeightedLattice {
 public:
  WeightedLattice(const MollifiedField& source, double xi,
                  Connectivity connectivity = Connectivity::eight);
  // Direct construction from raw vertex values (tests, oracles, controls).
  WeightedLattice(const GridSpec& spec, const GridArray<double>& values, double xi,
                  Connectivity connectivity = Connectivity::eight, double epsilon = 0.0,
                  std::uint64_t seed = 0);

  const GridSpec& spec() const { return spec_; }
  double xi() const { return xi_; }
  double epsilon() const { return epsilon_; }
  std::uint64_t seed() const { return seed_; }
  Connectivity connectivity() const { return connectivity_; }
  int vertex_count() const { return spec_.n_cells * spec_.n_cells; }

  int vertex(int ix, int iy) const { return spec_.index(ix, iy); }
  int ix(int v) const { return v % spec_.n_cells; }
  int iy(int v) const { return v / spec_.n_cells; }
  Point position(int v) const { return spec_.position(ix(v), iy(v)); }
  int nearest_vertex(const Point& p) const;

  // Weight of the lattice edge (u, v); u and v must be neighbours.
  double weight(int u, int v) const;

  // Calls f(neighbour, weight) for every lattice neighbour of v.
  template <typename F>
  void for_each_neighbor(int v, F&& f) const {
    const int n = spec_.n_cells;
    const int x = v % n;
    const int y = v / n;
    const int count = connectivity_ == Connectivity::eight ? 8 : 4;
    for (int k = 0; k < count; ++k) {
      const int nx = x + kDx[k];
      const int ny = y + kDy[k];
      if (nx < 0 || ny < 0 || nx >= n || ny >= n) continue;
      const int u = ny * n + nx;
      f(u, kLength[k] * spec_.spacing * (factor_[v] * factor_[u]));
    }
  }

  double summed_weight(std::span<const int> path) const;

 private:
  static constexpr int kDx[8] = {1, -1, 0, 0, 1, -1, 1, -1};
  static constexpr int kDy[8] = {0, 0, 1, -1, 1, 1, -1, -1};
  static constexpr double kLength[8] = {1, 1, 1, 1, 1.4142135623730951, 1.4142135623730951,
                                        1.4142135623730951, 1.4142135623730951};

  GridSpec spec_;
  double xi_;
  Connectivity connectivity_;
  double epsilon_;
  std::uint64_t seed_;
  std::vector<double> factor_;  // exp(xi F(v) / 2)
};

struct AnnulusSpec {
  Point center = Point::Zero();
  double r_inner = 0.0;
  double r_outer = 0.0;
};

struct Disk {
  Point center = Point::Zero();
  double radius = 0.0;
};

// Axis-aligned square [corner, corner + side]^2.
struct Square {
  Point corner = Point::Zero();
  double side = 1.0;
};

// Vertex subset used to restrict searches. Annuli include every vertex within
// half a lattice step of the closed annulus; disks and squares likewise.
class Region {
 public:
  static Region whole() { return Region(Kind::whole); }
  static Region disk(const Disk& d);
  static Region annulus(const AnnulusSpec& a);
  static Region square(const Square& s);
  // Explicit per-vertex membership (size = vertex count).
  static Region mask(std::vector<std::uint8_t> members);

  bool contains(const WeightedLattice& lat, int v) const;

 private:
  enum class Kind { whole, disk, annulus, square, mask };
  explicit Region(Kind k) : kind_(k) {}

  Kind kind_;
  Point center_ = Point::Zero();
  double lo_ = 0.0;  // squared radii (disk/annulus) or box corner
  double hi_ = 0.0;
  Point box_lo_ = Point::Zero();
  Point box_hi_ = Point::Zero();
  std::vector<std::uint8_t> mask_;
};

enum class DistanceKind { point_point, set_set, across, around, internal };

struct DistanceMeta {
  double xi = 0.0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
};

struct DistanceResult {
  double value = std::numeric_limits<double>::infinity();
  DistanceKind kind = DistanceKind::point_point;
  // Geodesic vertex sequence; for `around` a closed cycle with the first
  // vertex repeated at the end.
  std::optional<std::vector<int>> path;
  DistanceMeta meta;

  bool finite() const { return value < std::numeric_limits<double>::infinity(); }
};

// Vertices within half a lattice step of the circle |p - c| = r.
std::vector<int> circle_vertices(const WeightedLattice& lat, const Point& c, double r);

// Shortest path between the grid vertices nearest z and w.
DistanceResult distance(const WeightedLattice& lat, const Point& z, const Point& w);

// Multi-source / multi-sink shortest path between vertex sets, restricted to
// `region`. +infinity when no path exists.
DistanceResult set_distance(const WeightedLattice& lat, std::span<const int> sources,
                            std::span<const int> targets, const Region& region = Region::whole());

// Distance between the inner and outer boundary circles inside the annulus.
DistanceResult distance_across(const WeightedLattice& lat, const AnnulusSpec& a);

// Minimal weight of a lattice cycle inside the annulus that winds around the
// centre (hence separates the two boundary circles).
DistanceResult distance_around(const WeightedLattice& lat, const AnnulusSpec& a);

// Shortest path using only vertices of `region`; +infinity if z and w are
// disconnected there.
DistanceResult internal_distance(const WeightedLattice& lat, const Point& z, const Point& w,
                                 const Region& region);

// Left-to-right crossing of the square, restricted to the square.
DistanceResult left_right_crossing_cost(const WeightedLattice& lat, const Square& square);

// Distance from z to the circle of radius r around z (inside the disk).
DistanceResult distance_to_circle(const WeightedLattice& lat, const Point& z, double r);

// Signed winding number of a closed vertex cycle around `center`.
int winding_number(const WeightedLattice& lat, std::span<const int> cycle, const Point& center);

// "x y cumulative_weight" per line along a path.
void write_geodesic(std::ostream& out, const WeightedLattice& lat, std::span<const int> path);

void validate_annulus(const GridSpec& spec, const AnnulusSpec& a);

}  // namespace lfpp

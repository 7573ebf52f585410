#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <utility>
#include <cstdint>

#include "lfpp/error.hpp"

namespace lfpp {

using Point = Eigen::Vector2d;

template <typename Scalar>
using GridArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Square lattice of n_cells x n_cells vertices. Vertex (ix, iy) sits at the
// centre of its cell: origin + (ix + 1/2, iy + 1/2) * spacing, so the
// physical extent is n_cells * spacing. Storage is row-major with rows = iy.
struct GridSpec {
  int n_cells = 0;
  double spacing = 0.0;
  Point origin = Point::Zero();
  int padding_cells = 0;

  static constexpr int kMinCells = 4;

  double extent() const { return n_cells * spacing; }

  // Box spec with the default padding of n_cells / 8.
  static GridSpec box(int n_cells, double spacing, Point origin) {
    return {n_cells, spacing, origin, n_cells / 8};
  }

  // n_cells x n_cells grid covering [center - extent/2, center + extent/2]^2.
  static GridSpec centered(int n_cells, double extent, Point center = Point::Zero()) {
    const double h = extent / n_cells;
    return box(n_cells, h, center - Point::Constant(extent / 2));
  }

  void validate() const {
    require(n_cells >= kMinCells, "GridSpec: n_cells must be >= 4");
    require(std::isfinite(spacing) && spacing > 0, "GridSpec: spacing must be finite and positive");
    require(origin.allFinite(), "GridSpec: origin must be finite");
    require(padding_cells >= 0 && 4 * padding_cells < n_cells,
            "GridSpec: padding_cells must lie in [0, n_cells/4)");
  }

  Point position(int ix, int iy) const {
    return origin + Point(ix + 0.5, iy + 0.5) * spacing;
  }

  // Continuous lattice coordinates of a physical point.
  Point lattice_coords(const Point& p) const {
    return (p - origin) / spacing - Point::Constant(0.5);
  }

  int index(int ix, int iy) const { return iy * n_cells + ix; }

  // Nearest vertex to a physical point (clamped to the grid).
  std::pair<int, int> nearest(const Point& p) const {
    const Point c = lattice_coords(p);
    auto clamp = [this](double v) {
      const long r = std::lround(v);
      return static_cast<int>(std::clamp<long>(r, 0, n_cells - 1));
    };
    return {clamp(c.x()), clamp(c.y())};
  }

  // Physical box of the unpadded interior.
  Point interior_min() const { return origin + Point::Constant(padding_cells * spacing); }
  Point interior_max() const {
    return origin + Point::Constant((n_cells - padding_cells) * spacing);
  }

  bool inside_interior(const Point& p) const {
    const Point lo = interior_min();
    const Point hi = interior_max();
    return p.x() >= lo.x() && p.y() >= lo.y() && p.x() <= hi.x() && p.y() <= hi.y();
  }

  bool disk_inside_interior(const Point& c, double r) const {
    const Point lo = interior_min();
    const Point hi = interior_max();
    return c.x() - r >= lo.x() && c.y() - r >= lo.y() && c.x() + r <= hi.x() &&
           c.y() + r <= hi.y();
  }

  bool operator==(const GridSpec& o) const {
    return n_cells == o.n_cells && spacing == o.spacing && origin == o.origin &&
           padding_cells == o.padding_cells;
  }
};

enum class BoundaryCondition { zero };

// Field heights on a GridSpec; the discrete stand-in for a GFF sample.
template <typename Scalar>
struct BasicFieldGrid {
  GridSpec spec;
  GridArray<Scalar> values;
  BoundaryCondition boundary_condition = BoundaryCondition::zero;
  std::uint64_t seed = 0;

  static BasicFieldGrid constant(const GridSpec& spec, Scalar c) {
    BasicFieldGrid f{spec, GridArray<Scalar>::Constant(spec.n_cells, spec.n_cells, c)};
    return f;
  }

  Scalar at(int ix, int iy) const { return values(iy, ix); }
  Scalar& at(int ix, int iy) { return values(iy, ix); }

  // Bilinear interpolation at a physical point; points outside the vertex
  // hull are clamped to it.
  Scalar interpolate(const Point& p) const {
    const Point c = spec.lattice_coords(p);
    const int n = spec.n_cells;
    const double x = std::clamp(c.x(), 0.0, n - 1.0);
    const double y = std::clamp(c.y(), 0.0, n - 1.0);
    const int x0 = std::min(static_cast<int>(x), n - 2);
    const int y0 = std::min(static_cast<int>(y), n - 2);
    const Scalar fx = static_cast<Scalar>(x - x0);
    const Scalar fy = static_cast<Scalar>(y - y0);
    const Scalar top = (1 - fx) * values(y0, x0) + fx * values(y0, x0 + 1);
    const Scalar bottom = (1 - fx) * values(y0 + 1, x0) + fx * values(y0 + 1, x0 + 1);
    return (1 - fy) * top + fy * bottom;
  }
};

using FieldGrid = BasicFieldGrid<double>;

}  // namespace lfpp

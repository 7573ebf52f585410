#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <numbers>
#include <vector>

#include "lfpp/error.hpp"
#include "lfpp/grid.hpp"

namespace lfpp {

// Zero-boundary discrete GFF on `spec`. The covariance is 2*pi times the
// inverse of the combinatorial Dirichlet Laplacian on the (n-2)^2 interior
// vertices, which makes Cov(h(z), h(w)) ~ log(1/|z-w|) in physical units.
// Sampled exactly in the sine eigenbasis; mode (j, k) uses normal number
// (k-1)*(n-2) + (j-1) of the keyed stream (seed, replicate).
FieldGrid sample_dgff(const GridSpec& spec, std::uint64_t seed, std::uint64_t replicate = 0);

// Optional on-disk cache of sampled fields, one .fld file per
// (spec, seed, replicate). An empty path disables it.
void set_field_cache(const std::filesystem::path& dir);
std::filesystem::path field_cache();
std::string field_cache_key(const GridSpec& spec, std::uint64_t seed, std::uint64_t replicate);

// Number of points used to discretize a circle of the given radius.
inline int circle_points(double radius, double spacing) {
  return std::max(64, static_cast<int>(std::ceil(2.0 * std::numbers::pi * radius / spacing)));
}

// Checks the resolution floor (radius >= 2 spacings) and containment in the
// unpadded interior.
inline void check_circle(const GridSpec& spec, const Point& center, double radius) {
  require(std::isfinite(radius) && radius > 0, "circle_average: radius must be positive");
  require(radius >= 2.0 * spec.spacing * (1.0 - 1e-12),
          "circle_average: radius below the resolution floor of 2 lattice spacings");
  require(spec.disk_inside_interior(center, radius),
          "circle_average: circle leaves the unpadded domain");
}

// Mean of bilinearly interpolated values at K equispaced points on the circle.
template <typename Scalar>
Scalar circle_average(const BasicFieldGrid<Scalar>& field, const Point& center, double radius) {
  check_circle(field.spec, center, radius);
  const int k = circle_points(radius, field.spec.spacing);
  Scalar sum = 0;
  for (int i = 0; i < k; ++i) {
    const double a = 2.0 * std::numbers::pi * i / k;
    sum += field.interpolate(center + radius * Point(std::cos(a), std::sin(a)));
  }
  return sum / static_cast<Scalar>(k);
}

// Circle averages h_{e^{-t}}(z) on the log-radius grid t_min, t_min + dt, ...
struct CircleAverageSeries {
  Point center = Point::Zero();
  std::vector<double> t;
  std::vector<double> radii;
  std::vector<double> averages;
  double base_value = 0.0;

  // h_{e^{-t}}(z) - h_{e^{-t_min}}(z).
  std::vector<double> recentered() const {
    std::vector<double> out(averages.size());
    for (std::size_t i = 0; i < averages.size(); ++i) out[i] = averages[i] - base_value;
    return out;
  }
};

CircleAverageSeries circle_average_series(const FieldGrid& field, const Point& center,
                                          double t_min, double t_max, double dt);

// Covariance matrix 2*pi*L^{-1} restricted to the given points (nearest
// vertices), computed by a sparse Cholesky solve of the Dirichlet Laplacian.
// Independent of the sine-transform sampler; used as its oracle.
Eigen::MatrixXd discrete_green_covariance(const GridSpec& spec, const std::vector<Point>& points);

struct CorrelationReport {
  int replicates = 0;
  std::vector<double> correlations;
  double max_abs_correlation = 0.0;
  double null_band = 0.0;  // 3 / sqrt(replicates)
  bool independent = false;
};

// Correlations between a scalar statistic and each probe column; flags
// dependence when any |corr| leaves the 3/sqrt(n) band.
CorrelationReport correlation_screen(const std::vector<double>& statistic,
                                     const std::vector<std::vector<double>>& probes);

struct IndependenceConfig {
  int replicates = 2000;
  double s = 0.5;  // outer log-radius
  double t = 1.5;  // inner log-radius
  // Probe points relative to the centre; empty selects four points at
  // radius e^{-t}/2 on the diagonals.
  std::vector<Point> probe_offsets;
  std::uint64_t seed = 1;
  int jobs = 0;
  // Recentre probes at the outer circle instead: must be rejected.
  bool dependent_control = false;
};

// Correlates the radial increment h_{e^{-s}}(0) - h_{e^{-t}}(0) with the
// recentered interior probes h(p) - h_{e^{-t}}(0), p in B_0(e^{-t}), over
// independent DGFF replicates on `spec` (circles centred at the grid centre).
CorrelationReport radial_lateral_independence_test(const GridSpec& spec,
                                                   const IndependenceConfig& cfg);

}  // namespace lfpp

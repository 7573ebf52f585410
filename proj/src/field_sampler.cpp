#include "lfpp/field_sampler.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <bit>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "fft.hpp"
#include "lfpp/field_io.hpp"
#include "lfpp/parallel.hpp"
#include "lfpp/rng.hpp"
#include "lfpp/stats.hpp"

namespace lfpp {

namespace {

std::mutex cache_mutex;
std::filesystem::path cache_dir;

FieldGrid sample_dgff_exact(const GridSpec& spec, std::uint64_t seed, std::uint64_t replicate) {
  const int n = spec.n_cells;
  const int m = n - 2;
  const double denom = m + 1.0;

  std::vector<double> half_eig(m);
  for (int j = 1; j <= m; ++j) half_eig[j - 1] = 2.0 - 2.0 * std::cos(std::numbers::pi * j / denom);

  detail::FftwBuffer<double> buf(static_cast<std::size_t>(m) * m);
  const KeyedNormals normals(seed, replicate);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < m; ++j) {
      const std::uint64_t mode = static_cast<std::uint64_t>(k) * m + j;
      const double lambda = half_eig[j] + half_eig[k];
      buf[mode] = std::sqrt(two_pi / lambda) * normals(mode);
    }
  }

  std::unique_ptr<detail::FftwPlan> plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = std::make_unique<detail::FftwPlan>(fftw_plan_r2r_2d(
        m, m, buf.data(), buf.data(), FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE));
  }
  plan->execute();

  // FFTW's RODFT00 carries a factor 2 per axis; the orthonormal sine basis
  // carries sqrt(2/(m+1)) per axis.
  const double scale = 1.0 / (2.0 * denom);
  FieldGrid field{spec, GridArray<double>::Zero(n, n), BoundaryCondition::zero, seed};
  for (int iy = 0; iy < m; ++iy)
    for (int ix = 0; ix < m; ++ix)
      field.values(iy + 1, ix + 1) = scale * buf[static_cast<std::size_t>(iy) * m + ix];
  return field;
}

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xff;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void set_field_cache(const std::filesystem::path& dir) {
  std::lock_guard lock(cache_mutex);
  cache_dir = dir;
}

std::filesystem::path field_cache() {
  std::lock_guard lock(cache_mutex);
  return cache_dir;
}

std::string field_cache_key(const GridSpec& spec, std::uint64_t seed, std::uint64_t replicate) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint64_t v : {std::uint64_t{kFieldFormatVersion}, std::uint64_t(spec.n_cells),
                          std::bit_cast<std::uint64_t>(spec.spacing),
                          std::bit_cast<std::uint64_t>(spec.origin.x()),
                          std::bit_cast<std::uint64_t>(spec.origin.y()),
                          std::uint64_t(spec.padding_cells), seed, replicate})
    h = fnv1a(h, v);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FieldGrid sample_dgff(const GridSpec& spec, std::uint64_t seed, std::uint64_t replicate) {
  spec.validate();
  const auto dir = field_cache();
  if (dir.empty()) return sample_dgff_exact(spec, seed, replicate);
  const auto path = dir / ("dgff-" + field_cache_key(spec, seed, replicate) + ".fld");
  std::error_code ec;
  if (std::filesystem::exists(path, ec)) {
    try {
      LoadedField f = read_field(path);
      if (f.field.spec == spec && f.field.seed == seed) return std::move(f.field);
    } catch (const std::exception&) {
      // unreadable entry: fall through and overwrite it
    }
  }
  FieldGrid f = sample_dgff_exact(spec, seed, replicate);
  std::ostringstream tag;
  tag << std::this_thread::get_id();
  const auto tmp = path.string() + ".tmp" + tag.str();
  try {
    std::filesystem::create_directories(dir);
    write_field(std::filesystem::path(tmp), f);
    std::filesystem::rename(tmp, path);
  } catch (const std::exception&) {
    std::filesystem::remove(tmp, ec);  // the cache is best effort
  }
  return f;
}

CircleAverageSeries circle_average_series(const FieldGrid& field, const Point& center,
                                          double t_min, double t_max, double dt) {
  require(dt > 0 && std::isfinite(dt), "circle_average_series: dt must be positive");
  require(t_max >= t_min, "circle_average_series: t_max must be >= t_min");
  CircleAverageSeries s;
  s.center = center;
  const int steps = static_cast<int>(std::floor((t_max - t_min) / dt + 1e-9));
  for (int i = 0; i <= steps; ++i) {
    const double t = t_min + i * dt;
    const double r = std::exp(-t);
    s.t.push_back(t);
    s.radii.push_back(r);
    s.averages.push_back(circle_average(field, center, r));
  }
  s.base_value = s.averages.front();
  return s;
}

Eigen::MatrixXd discrete_green_covariance(const GridSpec& spec, const std::vector<Point>& points) {
  spec.validate();
  const int m = spec.n_cells - 2;
  const int unknowns = m * m;
  auto id = [m](int ix, int iy) { return (iy - 1) * m + (ix - 1); };

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(unknowns) * 5);
  for (int iy = 1; iy <= m; ++iy) {
    for (int ix = 1; ix <= m; ++ix) {
      const int row = id(ix, iy);
      triplets.emplace_back(row, row, 4.0);
      if (ix > 1) triplets.emplace_back(row, id(ix - 1, iy), -1.0);
      if (ix < m) triplets.emplace_back(row, id(ix + 1, iy), -1.0);
      if (iy > 1) triplets.emplace_back(row, id(ix, iy - 1), -1.0);
      if (iy < m) triplets.emplace_back(row, id(ix, iy + 1), -1.0);
    }
  }
  Eigen::SparseMatrix<double> laplacian(unknowns, unknowns);
  laplacian.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(laplacian);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("discrete_green_covariance: factorization failed");

  const auto p = static_cast<int>(points.size());
  std::vector<int> rows(p, -1);
  for (int a = 0; a < p; ++a) {
    const auto [ix, iy] = spec.nearest(points[a]);
    if (ix >= 1 && ix <= m && iy >= 1 && iy <= m) rows[a] = id(ix, iy);
  }

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
  for (int a = 0; a < p; ++a) {
    if (rows[a] < 0) continue;  // boundary ring: identically zero
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(unknowns);
    rhs[rows[a]] = 1.0;
    const Eigen::VectorXd col = solver.solve(rhs);
    for (int b = 0; b < p; ++b)
      if (rows[b] >= 0) cov(a, b) = 2.0 * std::numbers::pi * col[rows[b]];
  }
  return cov;
}

CorrelationReport correlation_screen(const std::vector<double>& statistic,
                                     const std::vector<std::vector<double>>& probes) {
  CorrelationReport rep;
  rep.replicates = static_cast<int>(statistic.size());
  require(rep.replicates >= 3, "correlation_screen: need at least 3 replicates");
  rep.null_band = 3.0 / std::sqrt(static_cast<double>(rep.replicates));
  for (const auto& probe : probes) {
    const double c = stats::correlation(statistic, probe);
    rep.correlations.push_back(c);
    if (std::isnan(c))
      rep.max_abs_correlation = std::numeric_limits<double>::quiet_NaN();
    else if (!std::isnan(rep.max_abs_correlation))
      rep.max_abs_correlation = std::max(rep.max_abs_correlation, std::abs(c));
  }
  rep.independent = !std::isnan(rep.max_abs_correlation) && rep.max_abs_correlation < rep.null_band;
  return rep;
}

CorrelationReport radial_lateral_independence_test(const GridSpec& spec,
                                                   const IndependenceConfig& cfg) {
  spec.validate();
  require(cfg.replicates >= 200, "radial_lateral_independence_test: replicates must be >= 200");
  require(cfg.s < cfg.t, "radial_lateral_independence_test: need s < t");
  const Point center = spec.origin + Point::Constant(spec.extent() / 2);
  const double r_outer = std::exp(-cfg.s);
  const double r_inner = std::exp(-cfg.t);
  check_circle(spec, center, r_outer);
  check_circle(spec, center, r_inner);

  std::vector<Point> offsets = cfg.probe_offsets;
  if (offsets.empty()) {
    const double a = r_inner / (2.0 * std::sqrt(2.0));
    offsets = {Point(a, a), Point(-a, a), Point(-a, -a), Point(a, -a)};
  }
  for (const auto& o : offsets)
    require(o.norm() < r_inner, "radial_lateral_independence_test: probe outside B_0(e^{-t})");

  const auto reps = static_cast<std::size_t>(cfg.replicates);
  std::vector<double> radial(reps);
  std::vector<std::vector<double>> probes(offsets.size(), std::vector<double>(reps));
  parallel_for(reps, cfg.jobs, [&](std::size_t r) {
    const FieldGrid f = sample_dgff(spec, cfg.seed, r);
    const double inner = circle_average(f, center, r_inner);
    const double outer = circle_average(f, center, r_outer);
    radial[r] = outer - inner;
    const double base = cfg.dependent_control ? outer : inner;
    for (std::size_t p = 0; p < offsets.size(); ++p)
      probes[p][r] = f.interpolate(center + offsets[p]) - base;
  });
  return correlation_screen(radial, probes);
}

}  // namespace lfpp

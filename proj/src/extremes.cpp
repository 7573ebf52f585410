#include "lfpp/extremes.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "lfpp/error.hpp"
#include "lfpp/field_sampler.hpp"
#include "lfpp/parallel.hpp"
#include "lfpp/rng.hpp"

namespace lfpp {

std::vector<Point> lattice_mesh(const Rect& u, double spacing) {
  require(std::isfinite(spacing) && spacing > 0, "mesh: spacing must be positive");
  require(u.lo.x() <= u.hi.x() && u.lo.y() <= u.hi.y(), "mesh: empty rectangle");
  const auto lo = [&](double a) { return static_cast<long>(std::ceil(a / spacing - 1e-9)); };
  const auto hi = [&](double a) { return static_cast<long>(std::floor(a / spacing + 1e-9)); };
  std::vector<Point> out;
  for (long j = lo(u.lo.y()); j <= hi(u.hi.y()); ++j)
    for (long i = lo(u.lo.x()); i <= hi(u.hi.x()); ++i)
      out.emplace_back(i * spacing, j * spacing);
  return out;
}

std::vector<TailPoint> exceedance_curve(std::span<const double> samples,
                                        std::span<const double> s_grid) {
  require(!samples.empty(), "exceedance: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<TailPoint> out;
  for (double s : s_grid) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), s);
    out.push_back({s, static_cast<int>(above), static_cast<int>(sorted.size())});
  }
  return out;
}

std::vector<double> uniform_grid(double s_lo, double s_hi, double step) {
  require(step > 0 && s_hi >= s_lo, "uniform_grid: bad range");
  std::vector<double> g;
  const long count = static_cast<long>(std::floor((s_hi - s_lo) / step + 1e-9));
  for (long i = 0; i <= count; ++i) g.push_back(s_lo + i * step);
  return g;
}

double max_circle_average(const FieldGrid& field, int n, int k, const Rect& u) {
  require(n >= 1 && k >= 1, "max_circle_average: n and k must be positive");
  const double r = std::exp(-static_cast<double>(n));
  const double mesh = std::exp(-static_cast<double>(n + k));
  require(mesh >= field.spec.spacing * (1 - 1e-12),
          "max_circle_average: mesh e^{-n-k} finer than the lattice spacing");
  const auto points = lattice_mesh(u, mesh);
  require(!points.empty(), "max_circle_average: no mesh point inside U");
  double best = -std::numeric_limits<double>::infinity();
  for (const Point& z : points) best = std::max(best, circle_average(field, z, r));
  return best;
}

void validate_max_config(const MaxStatConfig& cfg) {
  cfg.spec.validate();
  require(!cfg.n_list.empty(), "maxstats: empty n_list");
  require(cfg.replicates >= 1, "maxstats: replicates must be positive");
  require(cfg.k >= 1, "maxstats: k must be positive");
  for (int n : cfg.n_list) {
    require(n >= 1, "maxstats: n must be positive");
    const double r = std::exp(-static_cast<double>(n));
    check_circle(cfg.spec, cfg.u.lo, r);
    check_circle(cfg.spec, cfg.u.hi, r);
    check_circle(cfg.spec, Point(cfg.u.lo.x(), cfg.u.hi.y()), r);
    check_circle(cfg.spec, Point(cfg.u.hi.x(), cfg.u.lo.y()), r);
    require(std::exp(-static_cast<double>(n + cfg.k)) >= cfg.spec.spacing * (1 - 1e-12),
            "maxstats: mesh e^{-n-k} finer than the lattice spacing");
  }
}

std::vector<double> max_stat_replicate(const MaxStatConfig& cfg, std::uint64_t replicate) {
  const FieldGrid f = sample_dgff(cfg.spec, cfg.seed, replicate);
  std::vector<double> out;
  for (int n : cfg.n_list) out.push_back(max_circle_average(f, n, cfg.k, cfg.u));
  return out;
}

MaxStatRun max_circle_average(const MaxStatConfig& cfg) {
  validate_max_config(cfg);
  std::vector<std::vector<double>> rows(cfg.replicates);
  parallel_for(cfg.replicates, cfg.jobs,
               [&](std::size_t r) { rows[r] = max_stat_replicate(cfg, r); });
  MaxStatRun run;
  run.n_list = cfg.n_list;
  run.lattice_offset_exp = cfg.k;
  run.replicates = cfg.replicates;
  for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
    std::vector<double> m(cfg.replicates), c(cfg.replicates);
    for (int r = 0; r < cfg.replicates; ++r) {
      m[r] = rows[r][i];
      c[r] = m[r] - max_recentering(cfg.n_list[i]);
    }
    run.max_samples.push_back(std::move(m));
    run.recentered.push_back(std::move(c));
  }
  return run;
}

MaxLawSummary summarize_max_law(const MaxStatRun& run) {
  require(!run.recentered.empty(), "maxstats: empty run");
  MaxLawSummary s;
  for (const auto& c : run.recentered) {
    require(c.size() >= 2, "maxstats: need at least 2 replicates");
    s.mean.push_back(stats::mean(c));
    s.mean_stderr.push_back(stats::stddev(c) / std::sqrt(static_cast<double>(c.size())));
    s.iqr.push_back(stats::iqr(c));
  }
  s.c_hat = stats::mean(s.mean);
  for (double m : s.mean) s.residual.push_back(m - s.c_hat);
  return s;
}

std::vector<TailPoint> max_tail_estimate(const MaxStatRun& run, std::span<const double> s_grid,
                                         std::optional<std::size_t> n_index) {
  require(!run.recentered.empty(), "max_tail: empty run");
  std::vector<double> pool;
  for (std::size_t i = 0; i < run.recentered.size(); ++i)
    if (!n_index || *n_index == i)
      pool.insert(pool.end(), run.recentered[i].begin(), run.recentered[i].end());
  require(!pool.empty(), "max_tail: n index out of range");
  return exceedance_curve(pool, s_grid);
}

void validate_bridge_config(const BridgeConfig& c) {
  require(std::isfinite(c.T) && c.T >= 8, "bridge: T must be at least 8");
  require(std::isfinite(c.dt) && c.dt > 0 && c.dt <= 1, "bridge: dt must lie in (0, 1]");
  const double steps = c.T / c.dt;
  const double half = 0.5 * steps;
  require(std::abs(steps - std::round(steps)) < 1e-9 && std::abs(half - std::round(half)) < 1e-9,
          "bridge: T/2 must be a multiple of dt");
  require(c.alpha > 0 && c.beta >= c.alpha, "bridge: need 0 < alpha <= beta");
  const double lt = std::log(c.T);
  require(c.x >= c.alpha * lt - 1e-12 && c.x <= c.beta * lt + 1e-12,
          "bridge: x must lie in [alpha log T, beta log T]");
  require(c.replicates >= 1, "bridge: replicates must be positive");
  require(c.acceptance_floor > 0 && c.acceptance_floor < 1, "bridge: bad acceptance floor");
}

std::vector<double> sample_bridge_path(double T, double end, double dt, std::uint64_t seed,
                                       std::uint64_t attempt) {
  const int steps = static_cast<int>(std::lround(T / dt));
  require(steps >= 1, "bridge: T/dt must be at least 1");
  const KeyedNormals z(seed, attempt);
  std::vector<double> w(steps + 1);
  w[0] = 0.0;
  for (int i = 0; i + 1 < steps; ++i) {
    const double left = T - i * dt;
    const double mean = w[i] + dt * (end - w[i]) / left;
    const double var = dt * (left - dt) / left;
    w[i + 1] = mean + std::sqrt(var) * z(i);
  }
  w[steps] = end;
  return w;
}

std::optional<double> bridge_occupation(const std::vector<double>& path, const BridgeConfig& c) {
  const int steps = static_cast<int>(path.size()) - 1;
  const int start = steps / 2;
  const double lt = std::log(c.T);
  bool prev = false;
  double occ = 0.0;
  for (int i = start; i <= steps; ++i) {
    const double t = i * c.dt;
    if (path[i] > 2 * t - c.alpha * lt) return std::nullopt;
    const bool above = path[i] > 2 * t - c.beta * lt;
    if (i > start) occ += 0.5 * c.dt * (static_cast<double>(prev) + static_cast<double>(above));
    prev = above;
  }
  return occ;
}

BridgeRun simulate_bridge_occupation(const BridgeConfig& c) {
  validate_bridge_config(c);
  const double end = 2 * c.T - c.x;
  const long long min_attempts = static_cast<long long>(std::ceil(10.0 / c.acceptance_floor));
  const std::size_t block = 8192;

  BridgeRun run;
  run.T = c.T;
  run.x = c.x;
  run.alpha = c.alpha;
  run.beta = c.beta;
  run.dt = c.dt;
  std::vector<std::optional<double>> slot(block);
  long long accepted = 0;
  while (accepted < c.replicates) {
    const long long base = run.attempts;
    parallel_for(block, c.jobs, [&](std::size_t i) {
      slot[i] = bridge_occupation(sample_bridge_path(c.T, end, c.dt, c.seed, base + i), c);
    });
    for (std::size_t i = 0; i < block && accepted < c.replicates; ++i) {
      ++run.attempts;
      if (slot[i]) {
        run.occupation_samples.push_back(*slot[i]);
        ++accepted;
      }
    }
    const double rate = static_cast<double>(accepted) / run.attempts;
    if (accepted < c.replicates && run.attempts >= min_attempts && rate < c.acceptance_floor)
      throw std::runtime_error("bridge: acceptance rate " + std::to_string(rate) +
                               " below floor " + std::to_string(c.acceptance_floor) + " after " +
                               std::to_string(run.attempts) + " attempts");
  }
  run.replicates = static_cast<int>(accepted);
  run.acceptance_rate = static_cast<double>(accepted) / run.attempts;
  return run;
}

std::optional<TailFit> bridge_tail_fit(const BridgeRun& run, double s_step) {
  require(!run.occupation_samples.empty(), "bridge: empty run");
  const double lt2 = std::pow(std::log(run.T), 2);
  const auto grid = uniform_grid(0.0, run.T / 2, s_step);
  const auto curve = exceedance_curve(run.occupation_samples, grid);
  return fit_tail_window(curve, [lt2](double s) { return s / lt2; }, 1.0);
}

ThickPointReport thick_point_scan(const FieldGrid& field, double q_ref,
                                  const std::vector<double>& t_grid,
                                  const std::vector<Point>& mesh, double margin) {
  require(q_ref > 0, "thick_point_scan: q_ref must be positive");
  require(margin >= 0 && margin < 1, "thick_point_scan: margin must lie in [0, 1)");
  require(!t_grid.empty() && !mesh.empty(), "thick_point_scan: empty grid or mesh");
  for (double t : t_grid) require(t > 0, "thick_point_scan: t must be positive");
  const double bar = (1 - margin) * q_ref;
  ThickPointReport rep;
  rep.q_ref = q_ref;
  rep.margin = margin;
  rep.t_grid = t_grid;
  rep.mesh = mesh;
  rep.running_max.assign(mesh.size(), -std::numeric_limits<double>::infinity());
  for (double t : t_grid) {
    int count = 0;
    for (std::size_t p = 0; p < mesh.size(); ++p) {
      const double v = circle_average(field, mesh[p], std::exp(-t)) / t;
      rep.running_max[p] = std::max(rep.running_max[p], v);
      if (v >= bar) ++count;
    }
    rep.flagged_fraction.push_back(static_cast<double>(count) / mesh.size());
  }
  for (std::size_t p = 0; p < mesh.size(); ++p)
    if (rep.running_max[p] >= bar) rep.flagged.push_back(static_cast<int>(p));
  return rep;
}

}  // namespace lfpp

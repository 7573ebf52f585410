#include "lfpp/scaling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "fft.hpp"
#include "lfpp/error.hpp"
#include "lfpp/field_sampler.hpp"
#include "lfpp/mollifier.hpp"
#include "lfpp/parallel.hpp"
#include "lfpp/rng.hpp"

namespace lfpp {

GridSpec scaling_grid(double epsilon, const ScalingGridPolicy& policy) {
  require(std::isfinite(epsilon) && epsilon > 0, "scaling: epsilon must be positive");
  require(policy.spacing_ratio >= 1.0, "scaling: spacing_ratio must be >= 1");
  require(policy.extent > 4.0 / 3.0,
          "scaling: extent too small to hold the unit square inside the padding");
  const double h = epsilon / policy.spacing_ratio;
  const int needed = static_cast<int>(std::ceil(policy.extent / h));
  const int n = static_cast<int>(detail::next_smooth_size(std::max(needed, 16) - 1)) + 1;
  if (n > policy.max_cells)
    throw ResourceError("scaling: epsilon " + std::to_string(epsilon) + " needs n_cells = " +
                        std::to_string(n) + " > cap " + std::to_string(policy.max_cells));
  const Point center(0.5, 0.5);
  GridSpec spec = GridSpec::box(n, h, center - Point::Constant(n * h / 2));
  spec.validate();
  return spec;
}

std::uint64_t scaling_seed(std::uint64_t master, double epsilon) {
  return derive_seed(master, std::bit_cast<std::uint64_t>(epsilon));
}

std::vector<double> crossing_costs(double epsilon, std::span<const double> xis,
                                   std::uint64_t replicate, const ScalingOptions& opt) {
  const GridSpec spec = scaling_grid(epsilon, opt.policy);
  const std::uint64_t seed = scaling_seed(opt.seed, epsilon);
  const FieldGrid base =
      opt.zero_field ? FieldGrid::constant(spec, 0.0) : sample_dgff(spec, seed, replicate);
  MollifiedField m = mollify(base, epsilon);
  m.field.seed = seed;
  std::vector<double> out;
  out.reserve(xis.size());
  for (double xi : xis) {
    const WeightedLattice lat(m, xi, opt.connectivity);
    out.push_back(left_right_crossing_cost(lat, Square{Point(0, 0), 1.0}).value);
  }
  return out;
}

namespace {

void check_replicates(int replicates) {
  require(replicates >= 31 && replicates % 2 == 1,
          "scaling: replicates must be odd and at least 31");
}

void check_xi(double xi) { require(std::isfinite(xi) && xi > 0, "scaling: xi must be positive"); }

// costs[x][r] for every xi at one epsilon.
std::vector<std::vector<double>> crossing_table(const std::vector<double>& xis, double epsilon,
                                                int replicates, const ScalingOptions& opt) {
  scaling_grid(epsilon, opt.policy);  // fail on the cap before spawning work
  std::vector<std::vector<double>> rows(replicates);
  parallel_for(replicates, opt.jobs,
               [&](std::size_t r) { rows[r] = crossing_costs(epsilon, xis, r, opt); });
  std::vector<std::vector<double>> out(xis.size(), std::vector<double>(replicates));
  for (int r = 0; r < replicates; ++r)
    for (std::size_t x = 0; x < xis.size(); ++x) out[x][r] = rows[r][x];
  return out;
}

}  // namespace

double estimate_a_eps(double xi, double epsilon, int replicates, const ScalingOptions& opt) {
  check_xi(xi);
  check_replicates(replicates);
  const auto table = crossing_table({xi}, epsilon, replicates, opt);
  return stats::median(table[0]);
}

void validate_eps_grid(std::span<const double> eps_grid) {
  require(eps_grid.size() >= 4, "scaling: epsilon grid needs at least 4 points");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    require(std::isfinite(eps_grid[i]) && eps_grid[i] > 0 && eps_grid[i] < 1,
            "scaling: epsilons must lie in (0, 1)");
    if (i > 0) require(eps_grid[i] < eps_grid[i - 1], "scaling: epsilon grid must be descending");
  }
  require(std::log(eps_grid.front() / eps_grid.back()) >= 2.0 - 1e-9,
          "scaling: epsilon grid must span at least 2 e-folds");
}

ScalingRun fit_scaling(double xi, std::vector<double> eps_grid, std::vector<double> medians,
                       int replicates) {
  check_xi(xi);
  validate_eps_grid(eps_grid);
  require(medians.size() == eps_grid.size(), "scaling: one median per epsilon");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < medians.size(); ++i) {
    require(std::isfinite(medians[i]) && medians[i] > 0, "scaling: medians must be positive");
    lx.push_back(std::log(eps_grid[i]));
    ly.push_back(std::log(medians[i]));
  }
  ScalingRun run;
  run.xi = xi;
  run.replicates = replicates;
  run.fit = stats::ols(lx, ly);
  run.q_hat = (1.0 - run.fit.slope) / xi;
  run.q_stderr = run.fit.slope_stderr / xi;
  run.eps_grid = std::move(eps_grid);
  run.medians = std::move(medians);
  return run;
}

std::vector<ScalingRun> estimate_Q_family(const std::vector<double>& xis,
                                          const std::vector<double>& eps_grid, int replicates,
                                          const ScalingOptions& opt) {
  require(!xis.empty(), "scaling: empty xi list");
  for (double xi : xis) check_xi(xi);
  check_replicates(replicates);
  validate_eps_grid(eps_grid);
  for (double e : eps_grid) scaling_grid(e, opt.policy);

  std::vector<std::vector<double>> medians(xis.size());
  for (double e : eps_grid) {
    const auto table = crossing_table(xis, e, replicates, opt);
    for (std::size_t x = 0; x < xis.size(); ++x) medians[x].push_back(stats::median(table[x]));
  }
  std::vector<ScalingRun> runs;
  for (std::size_t x = 0; x < xis.size(); ++x)
    runs.push_back(fit_scaling(xis[x], eps_grid, medians[x], replicates));
  return runs;
}

ScalingRun estimate_Q(double xi, const std::vector<double>& eps_grid, int replicates,
                      const ScalingOptions& opt) {
  return estimate_Q_family({xi}, eps_grid, replicates, opt).front();
}

std::vector<double> default_eps_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 6; ++i) g.push_back(std::exp(-2.0 - 0.5 * i));
  return g;
}

SubcriticalReport subcritical_consistency(double xi, double q_hat) {
  check_xi(xi);
  require(std::isfinite(q_hat) && q_hat >= 2.0,
          "subcritical_consistency: q_hat must be at least 2");
  SubcriticalReport r;
  // Stable form of q - sqrt(q^2 - 4): product of the roots is 4.
  const double disc = std::sqrt(std::max(0.0, q_hat * q_hat - 4.0));
  r.gamma_hat = 4.0 / (q_hat + disc);
  r.residual = 2.0 / r.gamma_hat + r.gamma_hat / 2.0 - q_hat;
  r.implied_dimension = r.gamma_hat / xi;
  return r;
}

}  // namespace lfpp

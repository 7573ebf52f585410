#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lfpp/grid.hpp"
#include "lfpp/lattice.hpp"
#include "lfpp/stats.hpp"

namespace lfpp {

// Joint refinement of lattice and mollifier: spacing = epsilon / spacing_ratio
// on a box of side >= extent centred on the unit square.
struct ScalingGridPolicy {
  double spacing_ratio = 4.0;
  double extent = 1.6;
  int max_cells = 1024;
};

// Grid used for crossing costs at this epsilon. n_cells - 1 is rounded up to
// a 7-smooth size; throws ResourceError above policy.max_cells.
GridSpec scaling_grid(double epsilon, const ScalingGridPolicy& policy = {});

struct ScalingOptions {
  ScalingGridPolicy policy;
  std::uint64_t seed = 1;
  int jobs = 0;
  Connectivity connectivity = Connectivity::eight;
  bool zero_field = false;  // deterministic mode: field forced to 0
};

// Stream key of the field replicates at a given epsilon. Depends only on
// (seed, epsilon), so any sub-grid of epsilons reuses the same fields.
std::uint64_t scaling_seed(std::uint64_t master, double epsilon);

// Left-right crossing costs of [0,1]^2 for one field replicate, one value
// per xi (common random numbers: the same mollified field for every xi).
std::vector<double> crossing_costs(double epsilon, std::span<const double> xis,
                                   std::uint64_t replicate, const ScalingOptions& opt);

// Sample median of the crossing cost over `replicates` fields (odd, >= 31).
double estimate_a_eps(double xi, double epsilon, int replicates, const ScalingOptions& opt = {});

struct ScalingRun {
  double xi = 0.0;
  std::vector<double> eps_grid;  // descending
  int replicates = 0;
  std::vector<double> medians;
  double q_hat = 0.0;
  double q_stderr = 0.0;
  stats::LinearFit fit;  // log median on log epsilon
};

void validate_eps_grid(std::span<const double> eps_grid);

// Q = (1 - slope) / xi from the regression of log medians on log epsilon.
ScalingRun fit_scaling(double xi, std::vector<double> eps_grid, std::vector<double> medians,
                       int replicates);

ScalingRun estimate_Q(double xi, const std::vector<double>& eps_grid, int replicates,
                      const ScalingOptions& opt = {});

// One ScalingRun per xi, all evaluated on the same field replicates.
std::vector<ScalingRun> estimate_Q_family(const std::vector<double>& xis,
                                          const std::vector<double>& eps_grid, int replicates,
                                          const ScalingOptions& opt = {});

// e^{-2}, e^{-2.5}, ..., e^{-5}.
std::vector<double> default_eps_grid();

struct SubcriticalReport {
  double gamma_hat = 0.0;
  double residual = 0.0;       // 2/gamma + gamma/2 - q_hat
  double implied_dimension = 0.0;  // gamma_hat / xi, diagnostic only
};

// Smaller root of gamma^2/2 - q gamma + 2 = 0; requires q_hat >= 2.
SubcriticalReport subcritical_consistency(double xi, double q_hat);

}  // namespace lfpp

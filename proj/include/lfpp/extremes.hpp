#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lfpp/grid.hpp"
#include "lfpp/stats.hpp"

namespace lfpp {

// Axis-aligned rectangle [lo, hi].
struct Rect {
  Point lo = Point::Zero();
  Point hi = Point::Ones();

  bool contains(const Point& p) const {
    return p.x() >= lo.x() && p.y() >= lo.y() && p.x() <= hi.x() && p.y() <= hi.y();
  }
};

// Points of spacing * Z^2 inside U.
std::vector<Point> lattice_mesh(const Rect& u, double spacing);

// ---------------------------------------------------------------------------
// Empirical exceedance curves

struct TailPoint {
  double s = 0.0;
  int exceed = 0;  // samples strictly above s
  int total = 0;
  bool censored() const { return exceed == 0; }
  double probability() const { return static_cast<double>(exceed) / total; }
};

std::vector<TailPoint> exceedance_curve(std::span<const double> samples,
                                        std::span<const double> s_grid);

struct TailFit {
  stats::LinearFit fit;  // log P on the abscissa
  double s_lo = 0.0;
  double s_hi = 0.0;
  int points = 0;
};

// Fits log P against x(s) over the widest window where P <= p_max and at
// least min_exceed samples remain above s. nullopt if fewer than 3 points.
template <typename Abscissa>
std::optional<TailFit> fit_tail_window(const std::vector<TailPoint>& curve, Abscissa x,
                                       double p_max = 0.5, int min_exceed = 10) {
  std::vector<double> xs, ys;
  TailFit out;
  for (const auto& p : curve) {
    if (p.censored() || p.exceed < min_exceed || p.probability() > p_max) continue;
    if (xs.empty()) out.s_lo = p.s;
    out.s_hi = p.s;
    xs.push_back(x(p.s));
    ys.push_back(std::log(p.probability()));
  }
  if (xs.size() < 3) return std::nullopt;
  out.fit = stats::ols(xs, ys);
  out.points = static_cast<int>(xs.size());
  return out;
}

// s_lo, s_lo + step, ... up to s_hi inclusive.
std::vector<double> uniform_grid(double s_lo, double s_hi, double step);

// ---------------------------------------------------------------------------
// Maxima of circle averages

// 2n - (3/4) log n; in the N = e^n dictionary, 2 log N - (3/4) log log N.
inline double max_recentering(int n) { return 2.0 * n - 0.75 * std::log(static_cast<double>(n)); }

// max over z in (e^{-n-k} Z^2) cap U of h_{e^{-n}}(z) on one field.
double max_circle_average(const FieldGrid& field, int n, int k, const Rect& u);

struct MaxStatConfig {
  GridSpec spec = GridSpec::box(512, 2.0 / 512, Point(-0.5, -0.5));
  std::vector<int> n_list{2, 3};
  int k = 1;
  Rect u;
  int replicates = 500;
  std::uint64_t seed = 1;
  int jobs = 0;
};

void validate_max_config(const MaxStatConfig& cfg);

struct MaxStatRun {
  std::vector<int> n_list;
  int lattice_offset_exp = 1;
  int replicates = 0;
  std::vector<std::vector<double>> max_samples;  // [n index][replicate]
  std::vector<std::vector<double>> recentered;

  // log N for each n (the N = e^n parameterization).
  std::vector<double> log_N() const { return {n_list.begin(), n_list.end()}; }
};

// Maxima for replicate r of every n in the list (one DGFF sample shared by all n).
std::vector<double> max_stat_replicate(const MaxStatConfig& cfg, std::uint64_t replicate);

MaxStatRun max_circle_average(const MaxStatConfig& cfg);

struct MaxLawSummary {
  std::vector<double> mean;       // per n, recentered
  std::vector<double> mean_stderr;
  std::vector<double> iqr;
  double c_hat = 0.0;             // single fitted constant: mean over n of the means
  std::vector<double> residual;   // mean - c_hat
};

MaxLawSummary summarize_max_law(const MaxStatRun& run);

// Exceedance of the recentered maxima (all n pooled unless n_index given).
std::vector<TailPoint> max_tail_estimate(const MaxStatRun& run, std::span<const double> s_grid,
                                         std::optional<std::size_t> n_index = std::nullopt);

// ---------------------------------------------------------------------------
// Brownian bridge occupation

struct BridgeConfig {
  double T = 64.0;
  double x = 0.0;  // bridge ends at 2T - x
  double alpha = 0.25;
  double beta = 2.5;
  double dt = 0.25;
  int replicates = 100000;  // accepted paths wanted
  std::uint64_t seed = 1;
  int jobs = 0;
  double acceptance_floor = 1e-4;

  static BridgeConfig standard(double T) {
    BridgeConfig c;
    c.T = T;
    c.x = c.beta * std::log(T);
    return c;
  }
};

void validate_bridge_config(const BridgeConfig& cfg);

// Exact Brownian bridge from 0 at time 0 to `end` at time T on the grid
// 0, dt, ..., T (T/dt must be an integer), keyed by (seed, attempt).
std::vector<double> sample_bridge_path(double T, double end, double dt, std::uint64_t seed,
                                       std::uint64_t attempt);

// Time spent strictly above 2t - beta log T on [T/2, T] (trapezoid rule),
// or nullopt if the path exceeds 2t - alpha log T at a grid time in [T/2, T].
std::optional<double> bridge_occupation(const std::vector<double>& path, const BridgeConfig& cfg);

struct BridgeRun {
  double T = 0.0;
  double x = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double dt = 0.0;
  int replicates = 0;  // accepted
  long long attempts = 0;
  double acceptance_rate = 0.0;
  std::vector<double> occupation_samples;
};

// Rejection sampling until cfg.replicates paths are accepted; attempts are
// indexed so the accepted set does not depend on the number of threads.
// Throws std::runtime_error when the acceptance rate falls below the floor.
BridgeRun simulate_bridge_occupation(const BridgeConfig& cfg);

// Fits log P[occupation > S] against S / (log T)^2 over every S in [0, T/2]
// with at least 10 exceedances.
std::optional<TailFit> bridge_tail_fit(const BridgeRun& run, double s_step = 0.25);

// ---------------------------------------------------------------------------
// Thick points

struct ThickPointReport {
  double q_ref = 0.0;
  double margin = 0.0;  // relative: the bar is (1 - margin) * q_ref
  std::vector<double> t_grid;
  std::vector<Point> mesh;
  std::vector<double> running_max;      // per point: max over t of h_{e^{-t}}(z) / t
  std::vector<double> flagged_fraction;  // per t: share of points with h/t >= the bar
  std::vector<int> flagged;             // indices of points whose running max clears the bar
};

ThickPointReport thick_point_scan(const FieldGrid& field, double q_ref,
                                  const std::vector<double>& t_grid,
                                  const std::vector<Point>& mesh, double margin = 0.5);

}  // namespace lfpp

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lfpp/extremes.hpp"
#include "lfpp/field_sampler.hpp"
#include "lfpp/grid.hpp"
#include "lfpp/lattice.hpp"
#include "lfpp/mollifier.hpp"
#include "lfpp/stats.hpp"

namespace lfpp {

// One DGFF replicate, its mollification, and the lattice built on it.
struct LfppSample {
  FieldGrid raw;
  MollifiedField smooth;
};

// `shift` is added to the raw field before mollifying (Weyl checks).
LfppSample sample_lfpp(const GridSpec& spec, double epsilon, std::uint64_t seed,
                       std::uint64_t replicate, double shift = 0.0);

// ---------------------------------------------------------------------------
// Annulus distance tails

struct AnnulusTailConfig {
  GridSpec spec = GridSpec::centered(512, 1.0);
  double epsilon = 2.0 / 512;
  double xi = 0.416;
  double q_ref = 2.0;
  Point center = Point::Zero();
  // Fixed annulus A = A(inner_ratio, 1); distances across and around r A.
  double inner_ratio = 0.5;
  std::vector<double> r_list{std::exp(-3.0)};
  std::vector<double> s_grid = uniform_grid(1.0, 4.0, 0.05);
  int replicates = 500;
  std::uint64_t seed = 1;
  int jobs = 0;
  double shift = 0.0;
};

void validate_annulus_tail(const AnnulusTailConfig& cfg);

// D / (r^{xi Q} e^{xi h_r(z)}) for across and around r A, one replicate.
struct AnnulusSample {
  double across = 0.0;
  double around = 0.0;
  double circle_average = 0.0;
};
std::vector<AnnulusSample> annulus_replicate(const AnnulusTailConfig& cfg,
                                             std::uint64_t replicate);

struct TailShape {
  std::vector<TailPoint> upper;  // P[v > S]
  std::vector<TailPoint> lower;  // P[v < 1/S]
  std::optional<TailFit> upper_quadratic;  // log P on (log S)^2
  std::optional<TailFit> lower_quadratic;
  std::optional<stats::LinearFit> upper_loglog;  // log(-log P) on log log S
  std::optional<stats::LinearFit> lower_loglog;
};

// Values are divided by their median first, so S = 1 sits at the centre.
TailShape tail_shape(std::span<const double> normalized, std::span<const double> s_grid);

struct AnnulusTailRun {
  std::vector<double> r_list;
  std::vector<double> s_grid;
  int replicates = 0;
  std::vector<std::vector<double>> across;  // [r index][replicate], normalized
  std::vector<std::vector<double>> around;
  std::vector<TailShape> across_shape;
  std::vector<TailShape> around_shape;
};

AnnulusTailRun annulus_tail_stats(const AnnulusTailConfig& cfg);

// ---------------------------------------------------------------------------
// M_z diagnostic

struct MzConfig {
  GridSpec spec = GridSpec::centered(384, 3.0);
  double epsilon = 3.0 / 384;
  double xi = 0.416;
  double q_ref = 2.0;
  double a_eps = 1.0;  // LFPP normalization constant dividing all distances
  double t = 1.25;
  Point z = Point::Zero();
  double parallel_depth = 2.0;  // A-parallel = A(e^{-t-depth}, e^{-t})
  int oscillation_radii = 5;
  int replicates = 1000;
  std::uint64_t seed = 1;
  int jobs = 0;
  // Unrecentred variant that must correlate with the radial increment:
  // distances without e^{-xi h_{e^{-t}}(z)}, oscillation exp(h_r(w) - h_1(z)).
  bool dependent_control = false;
  double shift = 0.0;
};

void validate_mz(const MzConfig& cfg);

struct MzSample {
  double around = 0.0;        // component 1
  double across = 0.0;        // component 2
  double across_inverse = 0.0;  // component 3
  double oscillation = 0.0;   // component 4
  double m_z = 0.0;
  double radial = 0.0;  // h_{e^{-t}}(z) - h_1(z)
};

MzSample mz_sample(const MzConfig& cfg, const LfppSample& sample);
MzSample mz_replicate(const MzConfig& cfg, std::uint64_t replicate);

struct MzReport {
  std::vector<MzSample> samples;
  double median = 0.0;
  double q90 = 0.0;
  double correlation = 0.0;  // corr(log M_z, radial); NaN when degenerate
  double null_band = 0.0;
  bool degenerate = false;
  bool independent = false;
};

MzReport summarize_mz(std::vector<MzSample> samples);
MzReport m_z_diagnostic(const MzConfig& cfg);

// ---------------------------------------------------------------------------
// Modulus of continuity

enum class ModulusModel { log_power, euclid_power };
std::string to_string(ModulusModel m);

struct ModulusFit {
  std::vector<double> pair_separations;
  std::vector<double> distances;
  double theta_hat = 0.0;
  double theta_stderr = 0.0;
  ModulusModel model = ModulusModel::log_power;
  stats::LinearFit fit;
};

// log D = c - theta log log(1/r) (log-power) or log D = c - theta log(1/r)
// (euclid-power, theta the Hoelder exponent).
ModulusFit fit_modulus(std::span<const double> separations, std::span<const double> distances,
                       ModulusModel model);

enum class PairSampling { covering, quasi_random };

struct ModulusConfig {
  GridSpec spec = GridSpec::box(1024, 1.0 / 1024, Point::Zero());
  double epsilon = 2.0 / 1024;
  double xi = 0.416;
  Rect u{Point(0.3, 0.3), Point(0.7, 0.7)};
  std::vector<double> separations;  // empty: e^{-2.5}, e^{-3}, ..., e^{-5.5}
  PairSampling sampling = PairSampling::covering;
  int pairs_per_bin = 64;  // quasi_random only
  int replicates = 4;
  std::uint64_t seed = 1;
  int jobs = 0;
  double shift = 0.0;
};

void validate_modulus(const ModulusConfig& cfg);
std::vector<double> modulus_separations(const ModulusConfig& cfg);

struct PairSet {
  double separation = 0.0;
  std::vector<std::pair<Point, Point>> pairs;
};
std::vector<PairSet> modulus_pairs(const ModulusConfig& cfg);

struct ModulusBin {
  double separation = 0.0;
  std::vector<double> max;  // per replicate, over pairs
  std::vector<double> min;
  std::vector<double> median;
};

// Per-bin pair distances for one replicate, bins in separation order.
std::vector<std::vector<double>> modulus_replicate(const ModulusConfig& cfg,
                                                   const std::vector<PairSet>& pairs,
                                                   std::uint64_t replicate);

struct ModulusReport {
  std::vector<ModulusBin> bins;
  ModulusFit log_power;    // fitted to per-bin mean over replicates of log max
  ModulusFit euclid_power;
  ModulusModel selected = ModulusModel::log_power;  // smaller residual sum of squares
  // Exponents implied by the per-bin minima (near-min pairs).
  ModulusFit log_power_min;
};

ModulusReport summarize_modulus(std::vector<ModulusBin> bins, int replicates);
ModulusReport modulus_fit(const ModulusConfig& cfg);

// ---------------------------------------------------------------------------
// Supercritical probe

struct SupercriticalConfig {
  GridSpec spec = GridSpec::box(512, 1.0 / 512, Point::Zero());
  double epsilon = 1.0 / 512;
  double xi = 0.6;
  Rect u{Point(0.3, 0.3), Point(0.7, 0.7)};
  std::vector<int> n_list{2, 3, 4};
  int top = 5;  // mesh points with the largest h_{e^{-n}}(z)
  int replicates = 8;
  std::uint64_t seed = 1;
  int jobs = 0;
};

void validate_supercritical(const SupercriticalConfig& cfg);

// For each n: max over the `top` thickest mesh points (spacing e^{-n}) of
// D(z, boundary of B_z(e^{-n})), divided by the median of the same distance
// over the mesh of the first n (the typical coarse value).
std::vector<double> supercritical_ratios(const SupercriticalConfig& cfg, const FieldGrid& raw,
                                         const MollifiedField& smooth);

struct SupercriticalReport {
  std::vector<int> n_list;
  std::vector<std::vector<double>> ratios;  // [n index][replicate]
  std::vector<double> median_ratio;         // per n
};

SupercriticalReport supercritical_discontinuity_probe(const SupercriticalConfig& cfg);

}  // namespace lfpp

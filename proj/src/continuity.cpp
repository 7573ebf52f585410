#include "lfpp/continuity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lfpp/error.hpp"
#include "lfpp/parallel.hpp"

namespace lfpp {

LfppSample sample_lfpp(const GridSpec& spec, double epsilon, std::uint64_t seed,
                       std::uint64_t replicate, double shift) {
  FieldGrid raw = sample_dgff(spec, seed, replicate);
  if (shift != 0.0) raw.values += shift;
  MollifiedField smooth = mollify(raw, epsilon);
  return {std::move(raw), std::move(smooth)};
}

// ---------------------------------------------------------------------------

void validate_annulus_tail(const AnnulusTailConfig& c) {
  c.spec.validate();
  require(c.xi > 0 && std::isfinite(c.xi), "tail: xi must be positive");
  require(std::isfinite(c.q_ref), "tail: q_ref must be finite");
  require(c.inner_ratio > 0 && c.inner_ratio < 1, "tail: inner_ratio must lie in (0, 1)");
  require(!c.r_list.empty() && !c.s_grid.empty(), "tail: empty r_list or s_grid");
  require(c.replicates >= 500, "tail: at least 500 replicates");
  for (double s : c.s_grid) require(s >= 1.0, "tail: thresholds S must be >= 1");
  for (double r : c.r_list) {
    validate_annulus(c.spec, {c.center, c.inner_ratio * r, r});
    check_circle(c.spec, c.center, r);
    require(r >= c.epsilon, "tail: radius below the mollification scale");
  }
}

std::vector<AnnulusSample> annulus_replicate(const AnnulusTailConfig& c,
                                             std::uint64_t replicate) {
  const LfppSample s = sample_lfpp(c.spec, c.epsilon, c.seed, replicate, c.shift);
  const WeightedLattice lat(s.smooth, c.xi);
  std::vector<AnnulusSample> out;
  for (double r : c.r_list) {
    const AnnulusSpec a{c.center, c.inner_ratio * r, r};
    const double hr = circle_average(s.raw, c.center, r);
    // exp applied once to the combined exponent keeps the Weyl cancellation tight
    const double scale = std::exp(-c.xi * c.q_ref * std::log(r) - c.xi * hr);
    out.push_back({distance_across(lat, a).value * scale, distance_around(lat, a).value * scale,
                   hr});
  }
  return out;
}

namespace {

std::optional<stats::LinearFit> loglog_fit(const std::vector<TailPoint>& curve) {
  std::vector<double> x, y;
  for (const auto& p : curve) {
    if (p.s <= 1.0 || p.censored() || p.exceed < 10 || p.probability() > 0.5) continue;
    x.push_back(std::log(std::log(p.s)));
    y.push_back(std::log(-std::log(p.probability())));
  }
  if (x.size() < 3) return std::nullopt;
  return stats::ols(x, y);
}

}  // namespace

TailShape tail_shape(std::span<const double> normalized, std::span<const double> s_grid) {
  require(!normalized.empty(), "tail: no samples");
  std::vector<double> v(normalized.begin(), normalized.end());
  const double med = stats::median(v);
  require(med > 0, "tail: normalized values must be positive");
  std::vector<double> neg(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    require(v[i] > 0, "tail: normalized values must be positive");
    v[i] /= med;
    neg[i] = -v[i];
  }
  std::vector<double> neg_grid;
  for (double s : s_grid) neg_grid.push_back(-1.0 / s);
  TailShape t;
  t.upper = exceedance_curve(v, s_grid);
  t.lower = exceedance_curve(neg, neg_grid);  // -v > -1/S  <=>  v < 1/S
  for (std::size_t i = 0; i < t.lower.size(); ++i) t.lower[i].s = s_grid[i];
  const auto sq = [](double s) { return std::log(s) * std::log(s); };
  t.upper_quadratic = fit_tail_window(t.upper, sq);
  t.lower_quadratic = fit_tail_window(t.lower, sq);
  t.upper_loglog = loglog_fit(t.upper);
  t.lower_loglog = loglog_fit(t.lower);
  return t;
}

AnnulusTailRun annulus_tail_stats(const AnnulusTailConfig& c) {
  validate_annulus_tail(c);
  std::vector<std::vector<AnnulusSample>> rows(c.replicates);
  parallel_for(c.replicates, c.jobs, [&](std::size_t r) { rows[r] = annulus_replicate(c, r); });
  AnnulusTailRun run;
  run.r_list = c.r_list;
  run.s_grid = c.s_grid;
  run.replicates = c.replicates;
  for (std::size_t i = 0; i < c.r_list.size(); ++i) {
    std::vector<double> across, around;
    for (const auto& row : rows) {
      across.push_back(row[i].across);
      around.push_back(row[i].around);
    }
    run.across_shape.push_back(tail_shape(across, c.s_grid));
    run.around_shape.push_back(tail_shape(around, c.s_grid));
    run.across.push_back(std::move(across));
    run.around.push_back(std::move(around));
  }
  return run;
}

// ---------------------------------------------------------------------------

namespace {

AnnulusSpec a_circ(const MzConfig& c) {
  return {c.z, std::exp(-c.t - 0.51), std::exp(-c.t - 0.5)};
}
AnnulusSpec a_par(const MzConfig& c) {
  return {c.z, std::exp(-c.t - c.parallel_depth), std::exp(-c.t)};
}

}  // namespace

void validate_mz(const MzConfig& c) {
  c.spec.validate();
  require(c.xi > 0 && std::isfinite(c.xi), "mz: xi must be positive");
  require(c.a_eps > 0 && std::isfinite(c.a_eps), "mz: a_eps must be positive");
  require(c.t > 0 && std::isfinite(c.t), "mz: t must be positive");
  require(c.parallel_depth > 0, "mz: parallel_depth must be positive");
  require(c.oscillation_radii >= 2, "mz: need at least 2 oscillation radii");
  require(c.replicates >= 1, "mz: replicates must be positive");
  check_circle(c.spec, c.z, 1.0);
  validate_annulus(c.spec, a_circ(c));
  validate_annulus(c.spec, a_par(c));
  require(a_par(c).r_inner >= c.epsilon, "mz: A-parallel inner radius below epsilon");
}

MzSample mz_sample(const MzConfig& c, const LfppSample& s) {
  const WeightedLattice lat(s.smooth, c.xi);
  MzSample out;
  const double h_t = circle_average(s.raw, c.z, std::exp(-c.t));
  const double h_1 = circle_average(s.raw, c.z, 1.0);
  out.radial = h_t - h_1;
  const double exponent = c.xi * c.q_ref * c.t - (c.dependent_control ? 0.0 : c.xi * h_t);
  const double norm = std::exp(exponent) / c.a_eps;
  out.around = distance_around(lat, a_circ(c)).value * norm;
  out.across = distance_across(lat, a_par(c)).value * norm;
  out.across_inverse = 1.0 / out.across;

  double osc = c.dependent_control ? -std::numeric_limits<double>::infinity() : 0.0;
  const double outer = std::exp(-c.t);
  for (int j = 0; j < c.oscillation_radii; ++j) {
    const double r = std::exp(-c.t - c.parallel_depth * j / (c.oscillation_radii - 1));
    const double reach = outer - r;
    const double step = std::max(r / 2, s.raw.spec.spacing);
    const Rect box{c.z - Point::Constant(reach), c.z + Point::Constant(reach)};
    for (const Point& p : lattice_mesh(Rect{box.lo - c.z, box.hi - c.z}, step)) {
      if (p.norm() > reach) continue;
      const double h = circle_average(s.raw, c.z + p, r);
      osc = std::max(osc, c.dependent_control ? h - h_1 : std::abs(h - h_t));
    }
  }
  out.oscillation = std::exp(osc);
  out.m_z = std::max({out.around, out.across, out.across_inverse, out.oscillation});
  return out;
}

MzSample mz_replicate(const MzConfig& c, std::uint64_t replicate) {
  return mz_sample(c, sample_lfpp(c.spec, c.epsilon, c.seed, replicate, c.shift));
}

MzReport summarize_mz(std::vector<MzSample> samples) {
  require(samples.size() >= 2, "mz: need at least 2 samples");
  MzReport rep;
  std::vector<double> m, logm, radial;
  for (const auto& s : samples) {
    m.push_back(s.m_z);
    logm.push_back(std::log(s.m_z));
    radial.push_back(s.radial);
  }
  rep.median = stats::median(m);
  rep.q90 = stats::quantile(m, 0.9);
  rep.correlation = stats::correlation(logm, radial);
  rep.null_band = 3.0 / std::sqrt(static_cast<double>(samples.size()));
  rep.degenerate = std::isnan(rep.correlation);
  rep.independent = !rep.degenerate && std::abs(rep.correlation) <= rep.null_band;
  rep.samples = std::move(samples);
  return rep;
}

MzReport m_z_diagnostic(const MzConfig& c) {
  validate_mz(c);
  std::vector<MzSample> out(c.replicates);
  parallel_for(c.replicates, c.jobs, [&](std::size_t r) { out[r] = mz_replicate(c, r); });
  return summarize_mz(std::move(out));
}

// ---------------------------------------------------------------------------

std::string to_string(ModulusModel m) {
  return m == ModulusModel::log_power ? "log-power" : "euclid-power";
}

ModulusFit fit_modulus(std::span<const double> separations, std::span<const double> distances,
                       ModulusModel model) {
  require(separations.size() == distances.size(), "modulus: size mismatch");
  require(separations.size() >= 3, "modulus: need at least 3 points");
  std::vector<double> x, y;
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (std::size_t i = 0; i < separations.size(); ++i) {
    const double r = separations[i];
    require(r > 0 && r < std::exp(-1.0), "modulus: separations must lie in (0, e^{-1})");
    require(distances[i] > 0 && std::isfinite(distances[i]), "modulus: distances must be positive");
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    const double l = std::log(1.0 / r);
    x.push_back(model == ModulusModel::log_power ? std::log(l) : l);
    y.push_back(std::log(distances[i]));
  }
  require(hi > lo, "modulus: insufficient pair spread");
  ModulusFit f;
  f.pair_separations.assign(separations.begin(), separations.end());
  f.distances.assign(distances.begin(), distances.end());
  f.model = model;
  f.fit = stats::ols(x, y);
  f.theta_hat = -f.fit.slope;
  f.theta_stderr = f.fit.slope_stderr;
  return f;
}

std::vector<double> modulus_separations(const ModulusConfig& c) {
  if (!c.separations.empty()) return c.separations;
  std::vector<double> s;
  for (int i = 0; i <= 6; ++i) s.push_back(std::exp(-2.5 - 0.5 * i));
  return s;
}

void validate_modulus(const ModulusConfig& c) {
  c.spec.validate();
  require(c.xi > 0 && std::isfinite(c.xi), "modulus: xi must be positive");
  require(c.replicates >= 1, "modulus: replicates must be positive");
  require(c.pairs_per_bin >= 1, "modulus: pairs_per_bin must be positive");
  const auto seps = modulus_separations(c);
  require(seps.size() >= 3, "modulus: need at least 3 separations");
  const auto [lo, hi] = std::minmax_element(seps.begin(), seps.end());
  require(std::log(*hi / *lo) >= 3.0 - 1e-9, "modulus: separations must span 3 e-folds");
  for (double r : seps) {
    require(r > 0 && r < std::exp(-1.0), "modulus: separations must lie in (0, e^{-1})");
    require(r >= 2 * c.spec.spacing, "modulus: separation below 2 lattice spacings");
    require(c.spec.inside_interior(c.u.lo - Point::Constant(r)) &&
                c.spec.inside_interior(c.u.hi + Point::Constant(r)),
            "modulus: U plus the largest separation leaves the unpadded domain");
  }
}

std::vector<PairSet> modulus_pairs(const ModulusConfig& c) {
  const double golden = (std::sqrt(5.0) - 1) / 2;
  std::vector<PairSet> out;
  for (double r : modulus_separations(c)) {
    PairSet ps{r, {}};
    std::vector<Point> anchors;
    if (c.sampling == PairSampling::covering) {
      anchors = lattice_mesh(c.u, r);
      if (anchors.empty()) anchors.push_back((c.u.lo + c.u.hi) / 2);
    } else {
      // R2 low-discrepancy sequence over U
      const double a1 = 0.7548776662466927, a2 = 0.5698402909980532;
      for (int i = 0; i < c.pairs_per_bin; ++i) {
        const double fx = std::fmod(0.5 + a1 * (i + 1), 1.0);
        const double fy = std::fmod(0.5 + a2 * (i + 1), 1.0);
        anchors.emplace_back(c.u.lo.x() + fx * (c.u.hi.x() - c.u.lo.x()),
                             c.u.lo.y() + fy * (c.u.hi.y() - c.u.lo.y()));
      }
    }
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      const double phi = 2 * std::numbers::pi * std::fmod(golden * (i + 1), 1.0);
      ps.pairs.emplace_back(anchors[i], anchors[i] + r * Point(std::cos(phi), std::sin(phi)));
    }
    out.push_back(std::move(ps));
  }
  return out;
}

std::vector<std::vector<double>> modulus_replicate(const ModulusConfig& c,
                                                   const std::vector<PairSet>& pairs,
                                                   std::uint64_t replicate) {
  const LfppSample s = sample_lfpp(c.spec, c.epsilon, c.seed, replicate, c.shift);
  const WeightedLattice lat(s.smooth, c.xi);
  std::vector<std::vector<double>> out;
  for (const auto& ps : pairs) {
    std::vector<double> d;
    for (const auto& [z, w] : ps.pairs) d.push_back(distance(lat, z, w).value);
    out.push_back(std::move(d));
  }
  return out;
}

ModulusReport summarize_modulus(std::vector<ModulusBin> bins, int replicates) {
  require(bins.size() >= 3, "modulus: need at least 3 bins");
  std::vector<double> seps, mean_max, mean_min;
  for (const auto& b : bins) {
    std::vector<double> lmax, lmin;
    for (double v : b.max) lmax.push_back(std::log(v));
    for (double v : b.min) lmin.push_back(std::log(v));
    seps.push_back(b.separation);
    mean_max.push_back(std::exp(stats::mean(lmax)));
    mean_min.push_back(std::exp(stats::mean(lmin)));
  }
  ModulusReport rep;
  rep.log_power = fit_modulus(seps, mean_max, ModulusModel::log_power);
  rep.euclid_power = fit_modulus(seps, mean_max, ModulusModel::euclid_power);
  rep.log_power_min = fit_modulus(seps, mean_min, ModulusModel::log_power);
  if (replicates >= 2) {
    // replicate scatter of the per-replicate exponents
    for (auto* f : {&rep.log_power, &rep.euclid_power, &rep.log_power_min}) {
      std::vector<double> th;
      for (int r = 0; r < replicates; ++r) {
        std::vector<double> d;
        for (const auto& b : bins) d.push_back(f == &rep.log_power_min ? b.min[r] : b.max[r]);
        th.push_back(fit_modulus(seps, d, f->model).theta_hat);
      }
      f->theta_stderr =
          std::max(f->theta_stderr, stats::stddev(th) / std::sqrt(static_cast<double>(replicates)));
    }
  }
  rep.selected = rep.log_power.fit.residual_ss <= rep.euclid_power.fit.residual_ss
                     ? ModulusModel::log_power
                     : ModulusModel::euclid_power;
  rep.bins = std::move(bins);
  return rep;
}

ModulusReport modulus_fit(const ModulusConfig& c) {
  validate_modulus(c);
  const auto pairs = modulus_pairs(c);
  std::vector<std::vector<std::vector<double>>> rows(c.replicates);
  parallel_for(c.replicates, c.jobs,
               [&](std::size_t r) { rows[r] = modulus_replicate(c, pairs, r); });
  std::vector<ModulusBin> bins;
  for (std::size_t b = 0; b < pairs.size(); ++b) {
    ModulusBin bin;
    bin.separation = pairs[b].separation;
    for (const auto& row : rows) {
      bin.max.push_back(*std::max_element(row[b].begin(), row[b].end()));
      bin.min.push_back(*std::min_element(row[b].begin(), row[b].end()));
      bin.median.push_back(stats::median(row[b]));
    }
    bins.push_back(std::move(bin));
  }
  return summarize_modulus(std::move(bins), c.replicates);
}

// ---------------------------------------------------------------------------

void validate_supercritical(const SupercriticalConfig& c) {
  c.spec.validate();
  require(c.xi > 0 && std::isfinite(c.xi), "supercrit: xi must be positive");
  require(!c.n_list.empty(), "supercrit: empty n_list");
  require(c.top >= 1, "supercrit: top must be positive");
  require(c.replicates >= 1, "supercrit: replicates must be positive");
  for (int n : c.n_list) {
    const double r = std::exp(-static_cast<double>(n));
    require(r >= 2 * c.spec.spacing, "supercrit: radius e^{-n} below 2 lattice spacings");
    require(c.spec.disk_inside_interior(c.u.lo, r) && c.spec.disk_inside_interior(c.u.hi, r),
            "supercrit: circles around U leave the unpadded domain");
    require(lattice_mesh(c.u, r).size() >= 3, "supercrit: fewer than 3 mesh points in U");
  }
}

std::vector<double> supercritical_ratios(const SupercriticalConfig& c, const FieldGrid& raw,
                                         const MollifiedField& smooth) {
  const WeightedLattice lat(smooth, c.xi);
  std::vector<double> best;
  double typical = 0.0;
  for (int n : c.n_list) {
    const double r = std::exp(-static_cast<double>(n));
    std::vector<std::pair<double, double>> hd;  // (h_r(z), distance)
    for (const Point& z : lattice_mesh(c.u, r))
      hd.emplace_back(circle_average(raw, z, r), distance_to_circle(lat, z, r).value);
    if (best.empty()) {
      std::vector<double> d;
      for (const auto& p : hd) d.push_back(p.second);
      typical = stats::median(d);
    }
    std::sort(hd.begin(), hd.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    double m = 0;
    const int top = std::min<int>(c.top, static_cast<int>(hd.size()));
    for (int i = 0; i < top; ++i) m = std::max(m, hd[i].second);
    best.push_back(m);
  }
  for (double& b : best) b /= typical;
  return best;
}

SupercriticalReport supercritical_discontinuity_probe(const SupercriticalConfig& c) {
  validate_supercritical(c);
  std::vector<std::vector<double>> rows(c.replicates);
  parallel_for(c.replicates, c.jobs, [&](std::size_t r) {
    const LfppSample s = sample_lfpp(c.spec, c.epsilon, c.seed, r);
    rows[r] = supercritical_ratios(c, s.raw, s.smooth);
  });
  SupercriticalReport rep;
  rep.n_list = c.n_list;
  for (std::size_t i = 0; i < c.n_list.size(); ++i) {
    std::vector<double> v;
    for (const auto& row : rows) v.push_back(row[i]);
    rep.median_ratio.push_back(stats::median(v));
    rep.ratios.push_back(std::move(v));
  }
  return rep;
}

}  // namespace lfpp

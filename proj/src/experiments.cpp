#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>

#include "lfpp/continuity.hpp"
#include "lfpp/extremes.hpp"
#include "lfpp/field_sampler.hpp"
#include "lfpp/harness.hpp"
#include "lfpp/rng.hpp"
#include "lfpp/scaling.hpp"
#include "lfpp/stats.hpp"

namespace lfpp {

namespace {

using json = nlohmann::ordered_json;

// bracket for the critical parameter
constexpr double kXiLo = 0.4135;
constexpr double kXiHi = 0.4189;

std::string kv(std::initializer_list<std::pair<const char*, std::string>> items) {
  std::string out;
  for (const auto& [k, v] : items) {
    if (!out.empty()) out += ';';
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

std::string pass(bool ok) { return ok ? "pass" : "fail"; }

struct Caps {
  ResourceProfile profile;
  ProfileCaps caps;

  void cells(long long n) const {
    if (n > caps.max_cells)
      throw ResourceError("n_cells " + std::to_string(n) + " exceeds the " + to_string(profile) +
                          " profile cap of " + std::to_string(caps.max_cells));
  }
  void replicates(long long r) const {
    require(r >= 1, "replicates must be positive");
    if (r > caps.max_replicates)
      throw ResourceError("replicates " + std::to_string(r) + " exceeds the " +
                          to_string(profile) + " profile cap of " +
                          std::to_string(caps.max_replicates));
  }
};

// Values of one statistic for one params string, in record order.
std::vector<double> column(const std::vector<Record>& rs, const std::string& statistic,
                           const std::string& params) {
  std::vector<double> out;
  for (const auto& r : rs)
    if (r.statistic == statistic && r.params == params) out.push_back(r.value);
  return out;
}

json fit_json(const stats::LinearFit& f) {
  return {{"slope", f.slope},
          {"slope_stderr", f.slope_stderr},
          {"intercept", f.intercept},
          {"residual_ss", f.residual_ss},
          {"r_squared", f.r_squared}};
}

json tail_fit_json(const std::optional<TailFit>& f) {
  if (!f) return nullptr;
  json j = fit_json(f->fit);
  j["s_lo"] = f->s_lo;
  j["s_hi"] = f->s_hi;
  j["points"] = f->points;
  return j;
}

json curve_json(const std::vector<TailPoint>& c) {
  json a = json::array();
  for (const auto& p : c)
    a.push_back({{"s", p.s}, {"exceed", p.exceed}, {"total", p.total}, {"censored", p.censored()}});
  return a;
}

// ---------------------------------------------------------------------------

ExperimentPlan plan_covariance(const ExperimentConfig& cfg, Params& p, const Caps& caps) {
  const bool smoke = cfg.profile == ResourceProfile::smoke;
  const int n = static_cast<int>(p.integer("n_cells", smoke ? 64 : 256));
  const double extent = p.real("extent", 2.0);
  const int reps = static_cast<int>(p.integer("replicates", smoke ? 400 : 2000));
  const double t_min = p.real("circle_t_min", 1.0);
  const double t_max = p.real("circle_t_max", smoke ? 2.5 : 3.0);
  const double dt = p.real("circle_dt", 0.25);
  caps.cells(n);
  caps.replicates(reps);
  require(reps >= 2, "covariance: need at least 2 replicates");
  require(extent > 0, "covariance: extent must be positive");
  require(dt > 0 && t_max > t_min, "covariance: need circle_t_max > circle_t_min and dt > 0");
  const auto spec = GridSpec::centered(n, extent);
  spec.validate();
  check_circle(spec, Point::Zero(), std::exp(-t_min));
  check_circle(spec, Point::Zero(), std::exp(-t_max));

  // ten fixed pairs, coordinates in units of the interior half-width
  const double w = 0.5 * (spec.interior_max().x() - spec.interior_min().x());
  const std::vector<Point> pts{Point(0, 0),      Point(0.1, 0),   Point(0.3, 0),
                               Point(0.6, 0.6),  Point(0.5, 0.5), Point(0.5, -0.5),
                               Point(-0.8, 0),   Point(-0.7, 0.1), Point(0.2, -0.4),
                               Point(-0.3, 0.5), Point(0.9, 0.9)};
  const std::vector<std::pair<int, int>> pairs{{0, 0}, {0, 1}, {0, 2}, {0, 3}, {4, 4},
                                               {4, 5}, {6, 6}, {6, 7}, {8, 9}, {10, 10}};
  std::vector<Point> points;
  std::vector<std::pair<int, int>> cells;
  for (const auto& q : pts) {
    const auto [ix, iy] = spec.nearest(q * w);
    cells.emplace_back(ix, iy);
    points.push_back(spec.position(ix, iy));
  }
  const std::uint64_t seed = cfg.master_seed;
  const std::string kind = to_string(cfg.kind);

  ExperimentPlan plan;
  plan.units = reps;
  plan.run_unit = [=](std::size_t r) {
    const FieldGrid f = sample_dgff(spec, seed, r);
    std::vector<Record> out;
    for (std::size_t i = 0; i < cells.size(); ++i)
      out.push_back({kind, kv({{"point", std::to_string(i)}}), static_cast<std::int64_t>(r), "h",
                     f.at(cells[i].first, cells[i].second), seed});
    const auto series = circle_average_series(f, Point::Zero(), t_min, t_max, dt);
    for (std::size_t i = 0; i < series.t.size(); ++i)
      out.push_back({kind, kv({{"t", format_real(series.t[i])}}), static_cast<std::int64_t>(r),
                     "circle_average", series.averages[i], seed});
    return out;
  };
  plan.summarize = [=](const std::vector<Record>& rs) {
    const Eigen::MatrixXd g = discrete_green_covariance(spec, points);
    std::vector<std::vector<double>> h;
    for (std::size_t i = 0; i < points.size(); ++i)
      h.push_back(column(rs, "h", kv({{"point", std::to_string(i)}})));
    json rows = json::array();
    bool ok = true;
    double worst = 0;
    for (const auto& [a, b] : pairs) {
      const auto est = stats::covariance(h[a], h[b]);
      const double z = (est.value - g(a, b)) / est.stderr_;
      ok = ok && std::abs(z) <= 4.0;
      worst = std::max(worst, std::abs(z));
      rows.push_back({{"point_a", a},
                      {"point_b", b},
                      {"empirical", est.value},
                      {"stderr", est.stderr_},
                      {"oracle", g(a, b)},
                      {"z", z}});
    }
    // increment variance of the circle-average process against log-radius
    const auto ts = uniform_grid(t_min, t_max, dt);  // the series' own t grid
    const auto base = column(rs, "circle_average", kv({{"t", format_real(ts[0])}}));
    std::vector<double> x, y;
    for (std::size_t i = 1; i < ts.size(); ++i) {
      auto v = column(rs, "circle_average", kv({{"t", format_real(ts[i])}}));
      for (std::size_t r = 0; r < v.size(); ++r) v[r] -= base[r];
      x.push_back(ts[i] - ts[0]);
      y.push_back(stats::variance(v));
    }
    json j;
    j["pairs"] = rows;
    j["max_abs_z"] = worst;
    json bm = {{"t", x}, {"increment_variance", y}};
    bool bm_ok = false;
    if (x.size() >= 2) {
      const auto f = stats::ols(x, y);
      bm["fit"] = fit_json(f);
      bm_ok = std::abs(f.slope - 1.0) <= 0.1;
    }
    j["circle_average_process"] = bm;
    json checks = {{"covariance_check", pass(ok)}, {"circle_bm_check", pass(bm_ok)}};
    return json{{"checks", checks}, {"results", j}};
  };
  return plan;
}

// ---------------------------------------------------------------------------

ExperimentPlan plan_scaling(const ExperimentConfig& cfg, Params& p, const Caps& caps) {
  const bool smoke = cfg.profile == ResourceProfile::smoke;
  std::vector<double> smoke_grid;
  for (int i = 0; i < 5; ++i) smoke_grid.push_back(std::exp(-1.75 - 0.5 * i));
  const auto xis = p.reals("xi", {0.2, 0.3, 0.4, 0.5});
  const auto grid = p.reals("eps_grid", smoke ? smoke_grid : default_eps_grid());
  const int reps = static_cast<int>(p.integer("replicates", 31));
  ScalingOptions opt;
  opt.policy.spacing_ratio = p.real("spacing_ratio", smoke ? 1.0 : 4.0);
  opt.policy.extent = p.real("extent", 1.6);
  opt.policy.max_cells = caps.caps.max_cells;
  opt.connectivity =
      p.text("connectivity", "eight", {"eight", "four"}) == "four" ? Connectivity::four
                                                                   : Connectivity::eight;
  opt.seed = cfg.master_seed;
  opt.jobs = 1;
  require(!xis.empty(), "scaling: empty xi list");
  for (double xi : xis) require(xi > 0, "scaling: xi must be positive");
  validate_eps_grid(grid);
  require(reps >= 31 && reps % 2 == 1, "scaling: replicates must be odd and at least 31");
  caps.replicates(reps);
  require(opt.policy.spacing_ratio >= 1, "scaling: spacing_ratio must be at least 1");
  require(opt.policy.extent >= 1.25, "scaling: extent must cover the unit square");
  for (double eps : grid) {
    const auto spec = scaling_grid(eps, opt.policy);  // ResourceError past the cap
    require(eps <= spec.extent() / 8, "scaling: epsilon above extent/8");
  }
  const std::string kind = to_string(cfg.kind);

  ExperimentPlan plan;
  plan.units = grid.size() * reps;
  plan.run_unit = [=](std::size_t u) {
    const double eps = grid[u / reps];
    const auto r = static_cast<std::int64_t>(u % reps);
    const auto costs = crossing_costs(eps, xis, r, opt);
    std::vector<Record> out;
    for (std::size_t i = 0; i < xis.size(); ++i)
      out.push_back({kind, kv({{"xi", format_real(xis[i])}, {"eps", format_real(eps)}}), r,
                     "crossing_cost", costs[i], scaling_seed(opt.seed, eps)});
    return out;
  };
  plan.summarize = [=](const std::vector<Record>& rs) {
    json runs = json::array();
    std::vector<std::pair<double, ScalingRun>> fits;
    for (double xi : xis) {
      std::vector<double> med;
      for (double eps : grid)
        med.push_back(stats::median(column(
            rs, "crossing_cost", kv({{"xi", format_real(xi)}, {"eps", format_real(eps)}}))));
      const auto run = fit_scaling(xi, grid, med, reps);
      fits.emplace_back(xi, run);
      json j = {{"xi", xi},
                {"q_hat", run.q_hat},
                {"q_stderr", run.q_stderr},
                {"eps_grid", grid},
                {"medians", med},
                {"fit", fit_json(run.fit)}};
      if (run.q_hat >= 2) {
        const auto sub = subcritical_consistency(xi, run.q_hat);
        j["subcritical"] = {{"gamma_hat", sub.gamma_hat},
                            {"residual", sub.residual},
                            {"implied_dimension", sub.implied_dimension}};
      }
      runs.push_back(j);
    }
    json checks = json::object();
    auto sorted = fits;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (sorted.size() >= 2) {
      bool mono = true;
      for (std::size_t i = 1; i < sorted.size(); ++i)
        mono = mono && sorted[i].second.q_hat <= sorted[i - 1].second.q_hat;
      checks["monotone_check"] = pass(mono);
    }
    const ScalingRun *lo = nullptr, *hi = nullptr;
    for (const auto& [xi, run] : fits) {
      if (xi == kXiLo) lo = &run;
      if (xi == kXiHi) hi = &run;
    }
    if (lo && hi)
      checks["bracket_check"] = pass(lo->q_hat - 2 >= -2 * lo->q_stderr &&
                                     2 - hi->q_hat >= -2 * hi->q_stderr);
    return json{{"checks", checks}, {"results", {{"runs", runs}}}};
  };
  return plan;
}

// ---------------------------------------------------------------------------

ExperimentPlan plan_maxstats(const ExperimentConfig& cfg, Params& p, const Caps& caps) {
  const bool smoke = cfg.profile == ResourceProfile::smoke;
  MaxStatConfig c;
  const int n = static_cast<int>(p.integer("n_cells", smoke ? 128 : 512));
  const double extent = p.real("extent", 2.0);
  const double origin = p.real("origin", -0.5);
  c.spec = GridSpec::box(n, extent / n, Point(origin, origin));
  c.n_list = p.integers("n_list", {2, 3});
  c.k = static_cast<int>(p.integer("k", 1));
  const double u_lo = p.real("u_lo", 0.0), u_hi = p.real("u_hi", 1.0);
  c.u = Rect{Point(u_lo, u_lo), Point(u_hi, u_hi)};
  c.replicates = static_cast<int>(p.integer("replicates", smoke ? 100 : 500));
  c.seed = cfg.master_seed;
  c.jobs = 1;
  const double band = p.real("band_half_width", 1.0);
  const double s_step = p.real("s_step", 0.1);
  caps.cells(n);
  caps.replicates(c.replicates);
  require(extent > 0, "maxstats: extent must be positive");
  require(u_hi >= u_lo, "maxstats: empty U");
  require(band > 0 && s_step > 0, "maxstats: band_half_width and s_step must be positive");
  require(c.replicates >= 2, "maxstats: need at least 2 replicates");
  validate_max_config(c);
  const std::string kind = to_string(cfg.kind);

  ExperimentPlan plan;
  plan.units = c.replicates;
  plan.run_unit = [=](std::size_t r) {
    const auto m = max_stat_replicate(c, r);
    std::vector<Record> out;
    for (std::size_t i = 0; i < m.size(); ++i)
      out.push_back({kind, kv({{"n", std::to_string(c.n_list[i])}}), static_cast<std::int64_t>(r),
                     "max", m[i], c.seed});
    return out;
  };
  plan.summarize = [=](const std::vector<Record>& rs) {
    MaxStatRun run;
    run.n_list = c.n_list;
    run.lattice_offset_exp = c.k;
    run.replicates = c.replicates;
    for (int n_ : c.n_list) {
      auto m = column(rs, "max", kv({{"n", std::to_string(n_)}}));
      std::vector<double> rc;
      for (double v : m) rc.push_back(v - max_recentering(n_));
      run.max_samples.push_back(std::move(m));
      run.recentered.push_back(std::move(rc));
    }
    const auto s = summarize_max_law(run);
    const auto curve = max_tail_estimate(run, uniform_grid(-3.0, 4.0, s_step));
    const auto tail = fit_tail_window(curve, [](double x) { return x; });
    bool band_ok = true, iqr_ok = true;
    for (double r : s.residual) band_ok = band_ok && std::abs(r) <= band;
    for (std::size_t i = 1; i < s.iqr.size(); ++i) iqr_ok = iqr_ok && s.iqr[i] <= s.iqr[i - 1];
    const bool tail_ok = tail && tail->fit.slope >= -2.6 && tail->fit.slope <= -1.4;
    json res = {{"n_list", c.n_list},
                {"mean", s.mean},
                {"mean_stderr", s.mean_stderr},
                {"iqr", s.iqr},
                {"c_hat", s.c_hat},
                {"residual", s.residual},
                {"band_half_width", band},
                {"tail_fit", tail_fit_json(tail)},
                {"tail_curve", curve_json(curve)}};
    json checks = {{"band_check", pass(band_ok)},
                   {"iqr_check", pass(iqr_ok)},
                   {"tail_check", pass(tail_ok)}};
    return json{{"checks", checks}, {"results", res}};
  };
  return plan;
}

// ---------------------------------------------------------------------------

ExperimentPlan plan_bridge(const ExperimentConfig& cfg, Params& p, const Caps& caps) {
  const bool smoke = cfg.profile == ResourceProfile::smoke;
  const auto ts = p.reals("horizons", smoke ? std::vector<double>{16, 32} : std::vector<double>{32, 64, 128});
  const double alpha = p.real("alpha", 0.25);
  const double beta = p.real("beta", 2.5);
  const double x_factor = p.real("x_factor", beta);
  const double dt = p.real("dt", 0.25);
  const int reps = static_cast<int>(p.integer("replicates", smoke ? 2000 : 100000));
  const double floor = p.real("acceptance_floor", 1e-4);
  const double s_step = p.real("s_step", 0.25);
  caps.replicates(reps);
  require(!ts.empty(), "bridge: empty T list");
  require(s_step > 0, "bridge: s_step must be positive");
  std::vector<BridgeConfig> cs;
  for (double T : ts) {
    BridgeConfig c;
    c.T = T;
    c.alpha = alpha;
    c.beta = beta;
    c.x = x_factor * std::log(T);
    c.dt = dt;
    c.replicates = reps;
    c.acceptance_floor = floor;
    c.seed = derive_seed(cfg.master_seed, std::bit_cast<std::uint64_t>(T));
    c.jobs = 1;
    validate_bridge_config(c);
    cs.push_back(c);
  }
  const std::string kind = to_string(cfg.kind);

  ExperimentPlan plan;
  plan.units = cs.size();
  plan.run_unit = [=](std::size_t u) {
    const auto run = simulate_bridge_occupation(cs[u]);
    const std::string key = kv({{"T", format_real(cs[u].T)}});
    std::vector<Record> out;
    out.push_back({kind, key, 0, "attempts", static_cast<double>(run.attempts), cs[u].seed});
    for (std::size_t i = 0; i < run.occupation_samples.size(); ++i)
      out.push_back({kind, key, static_cast<std::int64_t>(i), "occupation",
                     run.occupation_samples[i], cs[u].seed});
    return out;
  };
  plan.summarize = [=](const std::vector<Record>& rs) {
    json per = json::array();
    std::vector<double> slopes;
    bool negative = true;
    for (const auto& c : cs) {
      const std::string key = kv({{"T", format_real(c.T)}});
      BridgeRun run;
      run.T = c.T;
      run.x = c.x;
      run.alpha = c.alpha;
      run.beta = c.beta;
      run.dt = c.dt;
      run.occupation_samples = column(rs, "occupation", key);
      run.replicates = static_cast<int>(run.occupation_samples.size());
      run.attempts = static_cast<long long>(column(rs, "attempts", key).at(0));
      run.acceptance_rate = static_cast<double>(run.replicates) / run.attempts;
      const auto fit = bridge_tail_fit(run, s_step);
      negative = negative && fit && fit->fit.slope + 3 * fit->fit.slope_stderr < 0;
      if (fit) slopes.push_back(fit->fit.slope);
      per.push_back({{"T", c.T},
                     {"x", c.x},
                     {"accepted", run.replicates},
                     {"attempts", run.attempts},
                     {"acceptance_rate", run.acceptance_rate},
                     {"fit", tail_fit_json(fit)}});
    }
    json checks = {{"negative_check", pass(negative)}};
    if (slopes.size() == cs.size() && slopes.size() >= 2) {
      double lo = 1e300, hi = 0;
      for (double s : slopes) lo = std::min(lo, std::abs(s)), hi = std::max(hi, std::abs(s));
      checks["stability_check"] = pass(lo > 0 && hi / lo <= 2.0);
    }
    return json{{"checks", checks},
                {"results", {{"alpha", alpha}, {"beta", beta}, {"dt", dt}, {"runs", per}}}};
  };
  return plan;
}

// ---------------------------------------------------------------------------

json shape_json(const TailShape& t) {
  auto lf = [](const std::optional<stats::LinearFit>& f) -> json {
    return f ? fit_json(*f) : json(nullptr);
  };
  int censored = 0;
  for (const auto& q : t.upper) censored += q.censored();
  for (const auto& q : t.lower) censored += q.censored();
  return {{"p_upper_at_1", t.upper.front().probability()},
          {"upper_quadratic", tail_fit_json(t.upper_quadratic)},
          {"lower_quadratic", tail_fit_json(t.lower_quadratic)},
          {"upper_loglog", lf(t.upper_loglog)},
          {"lower_loglog", lf(t.lower_loglog)},
          {"censored_points", censored},
          {"upper", curve_json(t.upper)},
          {"lower", curve_json(t.lower)}};
}

ExperimentPlan plan_tail(const ExperimentConfig& cfg, Params& p, const Caps& caps) {
  const bool smoke = cfg.profile == ResourceProfile::smoke;
  AnnulusTailConfig c;
  const int n = static_cast<int>(p.integer("n_cells", smoke ? 128 : 512));
  c.spec = GridSpec::centered(n, p.real("extent", 1.0));
  c.epsilon = p.real("eps_cells", 2.0) * c.spec.spacing;
  c.xi = p.real("xi", 0.416);
  c.q_ref = p.real("q_ref", 2.0);
  c.inner_ratio = p.real("inner_ratio", 0.5);
  c.r_list = p.reals("r_list", {std::exp(-3.0)});
  c.s_grid = uniform_grid(p.real("s_min", 1.0), p.real("s_max", 4.0), p.real("s_step", 0.05));
  c.replicates = static_cast<int>(p.integer("replicates", 500));
  c.seed = cfg.master_seed;
  c.jobs = 1;
  caps.cells(n);
  caps.replicates(c.replicates);
  validate_annulus_tail(c);
  const std::string kind = to_string(cfg.kind);

  ExperimentPlan plan;
  plan.units = c.replicates;
  plan.run_unit = [=](std::size_t r) {
    const auto rows = annulus_replicate(c, r);
    std::vector<Record> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string key = kv({{"xi", format_real(c.xi)}, {"r", format_real(c.r_list[i])}});
      const auto rr = static_cast<std::int64_t>(r);
      out.push_back({kind, key, rr, "across", rows[i].across, c.seed});
      out.push_back({kind, key, rr, "around", rows[i].around, c.seed});
      out.push_back({kind, key, rr, "circle_average", rows[i].circle_average, c.seed});
    }
    return out;
  };
  plan.summarize = [=](const std::vector<Record>& rs) {
    json per = json::array();
    bool lower_ok = true, slower_ok = true;
    for (double r : c.r_list) {
      const std::string key = kv({{"xi", format_real(c.xi)}, {"r", format_real(r)}});
      json j = {{"r", r}};
      for (const char* which : {"across", "around"}) {
        const auto t = tail_shape(column(rs, which, key), c.s_grid);
        lower_ok = lower_ok && t.lower_quadratic && t.lower_quadratic->fit.slope < 0;
        slower_ok = slower_ok && t.lower_quadratic && t.upper_quadratic &&
                    std::abs(t.upper_quadratic->fit.slope) < std::abs(t.lower_quadratic->fit.slope);
        j[which] = shape_json(t);
      }
      per.push_back(j);
    }
    json checks = {{"lower_tail_check", pass(lower_ok)}, {"upper_slower_check", pass(slower_ok)}};
    return json{{"checks", checks}, {"results", {{"xi", c.xi}, {"q_ref", c.q_ref}, {"radii", per}}}};
  };
  return plan;
}

// ---------------------------------------------------------------------------

ExperimentPlan plan_mz(const ExperimentConfig& cfg, Params& p, const Caps& caps) {
  const bool smoke = cfg.profile == ResourceProfile::smoke;
  MzConfig c;
  const int n = static_cast<int>(p.integer("n_cells", smoke ? 128 : 384));
  c.spec = GridSpec::centered(n, p.real("extent", smoke ? 2.7 : 3.0));
  c.epsilon = p.real("eps_cells", 1.0) * c.spec.spacing;
  c.xi = p.real("xi", 0.416);
  c.q_ref = p.real("q_ref", 2.0);
  c.a_eps = p.real("a_eps", 1.0);
  c.t = p.real("t", smoke ? 1.0 : 1.25);
  c.parallel_depth = p.real("parallel_depth", 2.0);
  c.oscillation_radii = static_cast<int>(p.integer("oscillation_radii", 5));
  c.replicates = static_cast<int>(p.integer("replicates", smoke ? 200 : 1000));
  c.dependent_control = p.flag("dependent_control", false);
  c.seed = cfg.master_seed;
  c.jobs = 1;
  caps.cells(n);
  caps.replicates(c.replicates);
  require(c.replicates >= 2, "mz: need at least 2 replicates");
  validate_mz(c);
  const std::string kind = to_string(cfg.kind);
  const std::string key = kv({{"xi", format_real(c.xi)}, {"t", format_real(c.t)}});

  ExperimentPlan plan;
  plan.units = c.replicates;
  plan.run_unit = [=](std::size_t r) {
    const auto s = mz_replicate(c, r);
    const auto rr = static_cast<std::int64_t>(r);
    return std::vector<Record>{{kind, key, rr, "around", s.around, c.seed},
                               {kind, key, rr, "across", s.across, c.seed},
                               {kind, key, rr, "across_inverse", s.across_inverse, c.seed},
                               {kind, key, rr, "oscillation", s.oscillation, c.seed},
                               {kind, key, rr, "m_z", s.m_z, c.seed},
                               {kind, key, rr, "radial", s.radial, c.seed}};
  };
  plan.summarize = [=](const std::vector<Record>& rs) {
    const auto around = column(rs, "around", key), across = column(rs, "across", key),
               inv = column(rs, "across_inverse", key), osc = column(rs, "oscillation", key),
               mz = column(rs, "m_z", key), radial = column(rs, "radial", key);
    std::vector<MzSample> samples;
    std::vector<int> argmax(4, 0);
    for (std::size_t i = 0; i < mz.size(); ++i) {
      samples.push_back({around[i], across[i], inv[i], osc[i], mz[i], radial[i]});
      const double v[4] = {around[i], across[i], inv[i], osc[i]};
      ++argmax[std::max_element(v, v + 4) - v];
    }
    const auto rep = summarize_mz(std::move(samples));
    json res = {{"xi", c.xi},
                {"t", c.t},
                {"dependent_control", c.dependent_control},
                {"median", rep.median},
                {"q90", rep.q90},
                {"correlation", rep.degenerate ? json(nullptr) : json(rep.correlation)},
                {"null_band", rep.null_band},
                {"degenerate", rep.degenerate},
                {"independent", rep.independent},
                {"dominant_component",
                 {{"around", argmax[0]},
                  {"across", argmax[1]},
                  {"across_inverse", argmax[2]},
                  {"oscillation", argmax[3]}}}};
    return json{{"checks", {{"independence_check", pass(rep.independent)}}}, {"results", res}};
  };
  return plan;
}

// ---------------------------------------------------------------------------

ExperimentPlan plan_modulus(const ExperimentConfig& cfg, Params& p, const Caps& caps) {
  const bool smoke = cfg.profile == ResourceProfile::smoke;
  ModulusConfig c;
  const int n = static_cast<int>(p.integer("n_cells", smoke ? 128 : 1024));
  c.spec = GridSpec::box(n, 1.0 / n, Point::Zero());
  c.epsilon = p.real("eps_cells", 2.0) * c.spec.spacing;
  c.xi = p.real("xi", 0.416);
  const double u_lo = p.real("u_lo", smoke ? 0.45 : 0.3), u_hi = p.real("u_hi", smoke ? 0.55 : 0.7);
  c.u = Rect{Point(u_lo, u_lo), Point(u_hi, u_hi)};
  std::vector<double> seps;
  for (int i = 0; i <= 6; ++i) seps.push_back(std::exp((smoke ? -1.15 : -2.5) - 0.5 * i));
  c.separations = p.reals("separations", seps);
  c.sampling = p.text("sampling", "covering", {"covering", "quasi_random"}) == "covering"
                   ? PairSampling::covering
                   : PairSampling::quasi_random;
  c.pairs_per_bin = static_cast<int>(p.integer("pairs_per_bin", 64));
  c.replicates = static_cast<int>(p.integer("replicates", smoke ? 2 : 4));
  c.seed = cfg.master_seed;
  c.jobs = 1;
  caps.cells(n);
  caps.replicates(c.replicates);
  require(u_hi > u_lo, "modulus: empty U");
  validate_modulus(c);
  const auto pairs = std::make_shared<const std::vector<PairSet>>(modulus_pairs(c));
  const std::string kind = to_string(cfg.kind);
  const auto key = [xi = c.xi](double sep, std::size_t i) {
    return kv({{"xi", format_real(xi)},
               {"separation", format_real(sep)},
               {"pair_index", std::to_string(i)}});
  };

  ExperimentPlan plan;
  plan.units = c.replicates;
  plan.run_unit = [=](std::size_t r) {
    const auto d = modulus_replicate(c, *pairs, r);
    std::vector<Record> out;
    for (std::size_t b = 0; b < d.size(); ++b)
      for (std::size_t i = 0; i < d[b].size(); ++i)
        out.push_back({kind, key((*pairs)[b].separation, i), static_cast<std::int64_t>(r),
                       "distance", d[b][i], c.seed});
    return out;
  };
  plan.summarize = [=](const std::vector<Record>& rs) {
    // records arrive replicate-major, bins and pairs in order
    std::vector<ModulusBin> bins(pairs->size());
    std::size_t k = 0;
    for (int r = 0; r < c.replicates; ++r)
      for (std::size_t b = 0; b < pairs->size(); ++b) {
        std::vector<double> d;
        for (std::size_t i = 0; i < (*pairs)[b].pairs.size(); ++i, ++k) {
          require(k < rs.size() && rs[k].params == key((*pairs)[b].separation, i),
                  "modulus: records out of order");
          d.push_back(rs[k].value);
        }
        bins[b].separation = (*pairs)[b].separation;
        bins[b].max.push_back(*std::max_element(d.begin(), d.end()));
        bins[b].min.push_back(*std::min_element(d.begin(), d.end()));
        bins[b].median.push_back(stats::median(d));
      }
    const auto rep = summarize_modulus(bins, c.replicates);
    auto mf = [](const ModulusFit& f) {
      return json{{"model", to_string(f.model)},
                  {"theta_hat", f.theta_hat},
                  {"theta_stderr", f.theta_stderr},
                  {"fit", fit_json(f.fit)}};
    };
    json jb = json::array();
    for (const auto& b : rep.bins)
      jb.push_back({{"separation", b.separation},
                    {"pairs", (*pairs)[&b - rep.bins.data()].pairs.size()},
                    {"max", b.max},
                    {"min", b.min},
                    {"median", b.median}});
    const double xi_c = 0.5 * (kXiLo + kXiHi);
    json res = {{"xi", c.xi},
                {"sampling", c.sampling == PairSampling::covering ? "covering" : "quasi_random"},
                {"log_power", mf(rep.log_power)},
                {"euclid_power", mf(rep.euclid_power)},
                {"selected_model", to_string(rep.selected)},
                {"log_power_min", mf(rep.log_power_min)},
                {"diagnostics",
                 {{"theta_reference_upper", xi_c / 4},
                  {"theta_prime_reference_lower", 3 * xi_c / 4},
                  {"theta_interval",
                   {rep.log_power.theta_hat - 2 * rep.log_power.theta_stderr,
                    rep.log_power.theta_hat + 2 * rep.log_power.theta_stderr}},
                  {"theta_prime_interval",
                   {rep.log_power_min.theta_hat - 2 * rep.log_power_min.theta_stderr,
                    rep.log_power_min.theta_hat + 2 * rep.log_power_min.theta_stderr}}}},
                {"bins", jb}};
    const bool pos = rep.log_power.theta_hat > 3 * rep.log_power.theta_stderr;
    return json{{"checks", {{"theta_positive_check", pass(pos)}}}, {"results", res}};
  };
  return plan;
}

// ---------------------------------------------------------------------------

ExperimentPlan plan_supercrit(const ExperimentConfig& cfg, Params& p, const Caps& caps) {
  const bool smoke = cfg.profile == ResourceProfile::smoke;
  SupercriticalConfig c;
  const int n = static_cast<int>(p.integer("n_cells", smoke ? 128 : 512));
  c.spec = GridSpec::box(n, 1.0 / n, Point::Zero());
  c.epsilon = p.real("eps_cells", 1.0) * c.spec.spacing;
  c.xi = p.real("xi", 0.6);
  const double u_lo = p.real("u_lo", 0.3), u_hi = p.real("u_hi", 0.7);
  c.u = Rect{Point(u_lo, u_lo), Point(u_hi, u_hi)};
  c.n_list = p.integers("n_list", {2, 3, 4});
  c.top = static_cast<int>(p.integer("top", 5));
  c.replicates = static_cast<int>(p.integer("replicates", smoke ? 4 : 8));
  c.seed = cfg.master_seed;
  c.jobs = 1;
  caps.cells(n);
  caps.replicates(c.replicates);
  require(u_hi > u_lo, "supercrit: empty U");
  validate_supercritical(c);
  const std::string kind = to_string(cfg.kind);
  const auto key = [xi = c.xi](int n_) {
    return kv({{"xi", format_real(xi)}, {"n", std::to_string(n_)}});
  };

  ExperimentPlan plan;
  plan.units = c.replicates;
  plan.run_unit = [=](std::size_t r) {
    const auto s = sample_lfpp(c.spec, c.epsilon, c.seed, r);
    const auto ratios = supercritical_ratios(c, s.raw, s.smooth);
    std::vector<Record> out;
    for (std::size_t i = 0; i < ratios.size(); ++i)
      out.push_back({kind, key(c.n_list[i]), static_cast<std::int64_t>(r), "ratio", ratios[i],
                     c.seed});
    return out;
  };
  plan.summarize = [=](const std::vector<Record>& rs) {
    std::vector<double> med;
    for (int n_ : c.n_list) med.push_back(stats::median(column(rs, "ratio", key(n_))));
    const std::string phase = c.xi > kXiHi ? "supercritical" : c.xi < kXiLo ? "subcritical" : "critical";
    json res = {{"xi", c.xi},
                {"phase", phase},
                {"n_list", c.n_list},
                {"median_ratio", med},
                {"grows_with_n", med.back() > med.front()}};
    return json{{"checks", json::object()}, {"results", res}};
  };
  return plan;
}

}  // namespace

ExperimentPlan plan_experiment(const ExperimentConfig& cfg) {
  Params p(cfg.params);
  const Caps caps{cfg.profile, profile_caps(cfg.profile)};
  ExperimentPlan plan;
  switch (cfg.kind) {
    case ExperimentKind::covariance: plan = plan_covariance(cfg, p, caps); break;
    case ExperimentKind::scaling: plan = plan_scaling(cfg, p, caps); break;
    case ExperimentKind::maxstats: plan = plan_maxstats(cfg, p, caps); break;
    case ExperimentKind::bridge: plan = plan_bridge(cfg, p, caps); break;
    case ExperimentKind::tail: plan = plan_tail(cfg, p, caps); break;
    case ExperimentKind::mz: plan = plan_mz(cfg, p, caps); break;
    case ExperimentKind::modulus: plan = plan_modulus(cfg, p, caps); break;
    case ExperimentKind::supercrit: plan = plan_supercrit(cfg, p, caps); break;
  }
  p.finish();
  plan.kind = cfg.kind;
  plan.resolved = p.resolved();
  return plan;
}

}  // namespace lfpp

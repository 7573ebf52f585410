#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "lfpp/error.hpp"
#include "lfpp/extremes.hpp"
#include "lfpp/field_sampler.hpp"
#include "lfpp/stats.hpp"

using namespace lfpp;

namespace {

MaxStatConfig small_max_config() {
  MaxStatConfig c;
  c.spec = GridSpec::box(256, 2.0 / 256, Point(-0.5, -0.5));
  c.replicates = 6;
  c.seed = 9;
  return c;
}

}  // namespace

TEST_CASE("lattice mesh") {
  const auto m = lattice_mesh(Rect{Point(0, 0), Point(1, 1)}, 0.25);
  CHECK(m.size() == 25);
  for (const auto& p : m) CHECK(Rect{Point(0, 0), Point(1, 1)}.contains(p));
  CHECK(lattice_mesh(Rect{Point(0.1, 0.1), Point(0.2, 0.2)}, 0.25).empty());
  CHECK(lattice_mesh(Rect{Point(-0.3, 0), Point(0.3, 0)}, 0.25).size() == 3);
}

TEST_CASE("recentering and the N dictionary") {
  CHECK(max_recentering(1) == 2.0);
  CHECK(max_recentering(3) == doctest::Approx(6 - 0.75 * std::log(3.0)));
  MaxStatRun run;
  run.n_list = {2, 3};
  CHECK(run.log_N() == std::vector<double>{2.0, 3.0});
}

TEST_CASE("singleton window reduces the maximum to one circle average") {
  const auto c = small_max_config();
  const FieldGrid f = sample_dgff(c.spec, 5);
  const double mesh = std::exp(-4.0);
  const Point z(9 * mesh, 11 * mesh);
  const Rect u{z - Point::Constant(mesh / 3), z + Point::Constant(mesh / 3)};
  CHECK(max_circle_average(f, 3, 1, u) == circle_average(f, z, std::exp(-3.0)));
  CHECK_THROWS_AS(max_circle_average(f, 3, 1, Rect{Point(0.01, 0.01), Point(0.011, 0.011)}),
                  PreconditionError);
  // mesh e^{-7} is finer than the spacing 2/256
  CHECK_THROWS_AS(max_circle_average(f, 3, 4, u), PreconditionError);
}

TEST_CASE("maximum runs are deterministic and thread-count independent") {
  auto c = small_max_config();
  c.jobs = 1;
  const auto a = max_circle_average(c);
  c.jobs = 3;
  const auto b = max_circle_average(c);
  CHECK(a.max_samples == b.max_samples);
  REQUIRE(a.recentered.size() == 2);
  for (int r = 0; r < c.replicates; ++r)
    CHECK(a.recentered[1][r] == a.max_samples[1][r] - max_recentering(3));
  c.seed = 10;
  CHECK(max_circle_average(c).max_samples != a.max_samples);
}

TEST_CASE("max config validation") {
  auto c = small_max_config();
  c.n_list = {1};  // radius e^{-1} around U leaves the padded box
  CHECK_THROWS_AS(validate_max_config(c), PreconditionError);
  c = small_max_config();
  c.n_list = {6};  // radius below two spacings
  CHECK_THROWS_AS(validate_max_config(c), PreconditionError);
  c = small_max_config();
  c.replicates = 0;
  CHECK_THROWS_AS(validate_max_config(c), PreconditionError);
}

TEST_CASE("max law summary") {
  MaxStatRun run;
  run.n_list = {2, 3};
  run.recentered = {{0, 1, 2, 3, 4}, {2, 3, 4, 5, 6}};
  const auto s = summarize_max_law(run);
  CHECK(s.mean == std::vector<double>{2, 4});
  CHECK(s.c_hat == 3);
  CHECK(s.residual == std::vector<double>{-1, 1});
  CHECK(s.iqr[0] == doctest::Approx(2.0));
  CHECK(s.mean_stderr[0] == doctest::Approx(std::sqrt(2.5 / 5)));
}

TEST_CASE("exceedance curves: bounds and censoring") {
  const std::vector<double> x{0.5, 1.0, 1.0, 2.0, 3.0};
  const std::vector<double> s{-1.0, 1.0, 2.5, 3.0, 10.0};
  const auto c = exceedance_curve(x, s);
  CHECK(c[0].probability() == 1.0);
  CHECK(c[1].exceed == 2);  // strictly above
  CHECK(c[2].exceed == 1);
  CHECK(c[3].censored());
  CHECK(c[4].censored());
  CHECK(c[4].total == 5);

  MaxStatRun run;
  run.recentered = {{0, 1}, {2, 3}};
  const std::vector<double> g{1.5};
  CHECK(max_tail_estimate(run, g)[0].exceed == 2);
  CHECK(max_tail_estimate(run, g, 0)[0].exceed == 0);
  CHECK(max_tail_estimate(run, g, 1)[0].exceed == 2);
}

TEST_CASE("tail window fit recovers an exponential rate") {
  // Quantiles of Exp(2): P[X > s] = e^{-2 s} up to rounding of the grid.
  std::vector<double> x;
  const int n = 200000;
  for (int i = 0; i < n; ++i) x.push_back(-std::log(1.0 - (i + 0.5) / n) / 2.0);
  const auto grid = uniform_grid(0, 5, 0.1);
  const auto fit = fit_tail_window(exceedance_curve(x, grid), [](double s) { return s; });
  REQUIRE(fit);
  CHECK(fit->fit.slope == doctest::Approx(-2.0).epsilon(0.01));
  CHECK(fit->s_lo == doctest::Approx(0.4));
  CHECK(fit->s_hi <= 5.0);
  const std::vector<double> few{1, 2};
  CHECK_FALSE(fit_tail_window(exceedance_curve(few, grid), [](double s) { return s; }));
}

TEST_CASE("bridge paths: exact endpoints and Gaussian marginals") {
  const double T = 16, end = 2 * T - 3.0, dt = 0.25;
  const int reps = 20000;
  const int steps = static_cast<int>(T / dt);
  std::vector<int> probe{8, 32, 63};
  std::vector<std::vector<double>> v(probe.size());
  for (int r = 0; r < reps; ++r) {
    const auto w = sample_bridge_path(T, end, dt, 3, r);
    REQUIRE(w.size() == static_cast<std::size_t>(steps + 1));
    CHECK(w.front() == 0.0);
    CHECK(w.back() == end);
    for (std::size_t p = 0; p < probe.size(); ++p) v[p].push_back(w[probe[p]]);
  }
  for (std::size_t p = 0; p < probe.size(); ++p) {
    const double t = probe[p] * dt;
    const double mean = t / T * end;
    const double var = t - t * t / T;
    const double m = stats::mean(v[p]);
    const double s2 = stats::variance(v[p]);
    CHECK(std::abs(m - mean) <= 3 * std::sqrt(var / reps));
    CHECK(std::abs(s2 - var) <= 3 * var * std::sqrt(2.0 / (reps - 1)));
  }
}

TEST_CASE("bridge occupation: degenerate curves") {
  auto c = BridgeConfig::standard(16);
  c.replicates = 500;
  SUBCASE("beta = alpha gives zero occupation") {
    c.beta = c.alpha;
    c.x = c.alpha * std::log(c.T);
    const auto run = simulate_bridge_occupation(c);
    CHECK(run.replicates == 500);
    for (double o : run.occupation_samples) CHECK(o == 0.0);
  }
  SUBCASE("beta far above the bridge range gives the whole half interval") {
    c.x = c.alpha * std::log(c.T);
    c.beta = 100;
    const auto run = simulate_bridge_occupation(c);
    for (double o : run.occupation_samples) CHECK(o == doctest::Approx(c.T / 2).epsilon(1e-12));
  }
  SUBCASE("every accepted path respects the alpha curve") {
    const double end = 2 * c.T - c.x;
    int accepted = 0;
    for (int a = 0; a < 300; ++a) {
      const auto w = sample_bridge_path(c.T, end, c.dt, c.seed, a);
      const auto occ = bridge_occupation(w, c);
      bool below = true;
      for (std::size_t i = w.size() / 2; i < w.size(); ++i)
        below = below && w[i] <= 2 * (i * c.dt) - c.alpha * std::log(c.T);
      CHECK(occ.has_value() == below);
      if (occ) {
        ++accepted;
        CHECK(*occ >= 0);
        CHECK(*occ <= c.T / 2);
      }
    }
    CHECK(accepted > 0);
  }
}

TEST_CASE("bridge simulation is deterministic and guarded") {
  auto c = BridgeConfig::standard(32);
  c.replicates = 3000;
  c.jobs = 1;
  const auto a = simulate_bridge_occupation(c);
  c.jobs = 4;
  const auto b = simulate_bridge_occupation(c);
  CHECK(a.occupation_samples == b.occupation_samples);
  CHECK(a.attempts == b.attempts);
  CHECK(a.acceptance_rate == doctest::Approx(3000.0 / a.attempts));
  CHECK(a.acceptance_rate > 0);
  CHECK(a.acceptance_rate < 1);

  c.acceptance_floor = 0.99;  // unreachable: abort with a diagnostic
  c.replicates = 200000;
  CHECK_THROWS_AS(simulate_bridge_occupation(c), std::runtime_error);

  auto bad = BridgeConfig::standard(32);
  bad.T = 4;
  CHECK_THROWS_AS(validate_bridge_config(bad), PreconditionError);
  bad = BridgeConfig::standard(32);
  bad.dt = 1.5;
  CHECK_THROWS_AS(validate_bridge_config(bad), PreconditionError);
  bad.dt = 0.3;  // T/2 off the grid
  CHECK_THROWS_AS(validate_bridge_config(bad), PreconditionError);
  bad = BridgeConfig::standard(32);
  bad.x = 100;
  CHECK_THROWS_AS(validate_bridge_config(bad), PreconditionError);
}

TEST_CASE("bridge tail fit uses S / (log T)^2") {
  BridgeRun run;
  run.T = 64;
  const double lt2 = std::pow(std::log(64.0), 2);
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    run.occupation_samples.push_back(std::min(32.0, -std::log(1.0 - (i + 0.5) / n) * lt2 / 0.8));
  const auto fit = bridge_tail_fit(run);
  REQUIRE(fit);
  CHECK(fit->fit.slope == doctest::Approx(-0.8).epsilon(0.02));
}

TEST_CASE("thick point scan controls") {
  const auto spec = GridSpec::box(256, 2.0 / 256, Point(-0.5, -0.5));
  const auto mesh = lattice_mesh(Rect{Point(0.2, 0.2), Point(0.8, 0.8)}, 0.1);
  const std::vector<double> ts{1.5, 2.0, 2.5, 3.0};
  SUBCASE("zero field is never flagged") {
    const FieldGrid f = FieldGrid::constant(spec, 0.0);
    for (double q : {0.1, 2.0, 5.0}) {
      const auto rep = thick_point_scan(f, q, ts, mesh);
      CHECK(rep.flagged.empty());
      for (double fr : rep.flagged_fraction) CHECK(fr == 0.0);
    }
  }
  SUBCASE("a +10 plateau is flagged at every small scale") {
    FieldGrid f = FieldGrid::constant(spec, 0.0);
    const Point spike(0.5, 0.5);
    for (int y = 0; y < 256; ++y)
      for (int x = 0; x < 256; ++x)
        if ((spec.position(x, y) - spike).norm() <= 0.15) f.at(x, y) = 10.0;
    const std::vector<double> small_t{2.0, 2.5, 3.0};
    const auto rep = thick_point_scan(f, 2.0, small_t, mesh);
    int idx = -1;
    for (std::size_t p = 0; p < mesh.size(); ++p)
      if ((mesh[p] - spike).norm() < 1e-9) idx = static_cast<int>(p);
    REQUIRE(idx >= 0);
    CHECK(std::find(rep.flagged.begin(), rep.flagged.end(), idx) != rep.flagged.end());
    CHECK(rep.running_max[idx] == doctest::Approx(10 / 2.0));
    CHECK(rep.running_max[0] == 0.0);  // circles around (0.2, 0.2) miss the plateau
  }
  SUBCASE("DGFF flags thin out at finer scales") {
    const auto fine_mesh = lattice_mesh(Rect{Point(0.1, 0.1), Point(0.9, 0.9)}, 0.05);
    std::vector<double> coarse, fine;
    for (int r = 0; r < 12; ++r) {
      const auto rep = thick_point_scan(sample_dgff(spec, 31, r), 2.0, ts, fine_mesh);
      coarse.push_back(rep.flagged_fraction.front());
      fine.push_back(rep.flagged_fraction.back());
    }
    MESSAGE("flagged fraction t=1.5: " << stats::mean(coarse) << "  t=3: " << stats::mean(fine));
    CHECK(stats::mean(fine) < stats::mean(coarse));
  }
  CHECK_THROWS_AS(thick_point_scan(FieldGrid::constant(spec, 0.0), 2.0, {6.0}, mesh),
                  PreconditionError);
}

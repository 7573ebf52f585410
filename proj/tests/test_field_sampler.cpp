#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "lfpp/field_io.hpp"
#include "lfpp/field_sampler.hpp"
#include "lfpp/rng.hpp"
#include "lfpp/stats.hpp"

using namespace lfpp;

TEST_CASE("grid spec validation") {
  CHECK_THROWS_AS(GridSpec::box(3, 0.1, Point::Zero()).validate(), PreconditionError);
  CHECK_THROWS_AS((GridSpec{16, std::nan(""), Point::Zero(), 0}).validate(), PreconditionError);
  CHECK_THROWS_AS((GridSpec{16, 0.1, Point::Zero(), 4}).validate(), PreconditionError);
  CHECK_NOTHROW(GridSpec::centered(64, 2.0).validate());
  CHECK(GridSpec::centered(64, 2.0).extent() == doctest::Approx(2.0));
}

TEST_CASE("dgff has an exactly zero boundary ring and is deterministic") {
  const auto spec = GridSpec::centered(40, 1.0);
  const FieldGrid a = sample_dgff(spec, 99, 3);
  const FieldGrid b = sample_dgff(spec, 99, 3);
  const FieldGrid c = sample_dgff(spec, 99, 4);
  const int n = spec.n_cells;
  for (int i = 0; i < n; ++i) {
    CHECK(a.at(i, 0) == 0.0);
    CHECK(a.at(i, n - 1) == 0.0);
    CHECK(a.at(0, i) == 0.0);
    CHECK(a.at(n - 1, i) == 0.0);
  }
  CHECK((a.values == b.values).all());
  CHECK(!(a.values == c.values).all());
  CHECK(a.values.allFinite());
}

TEST_CASE("sparse green oracle agrees with a dense inverse on a tiny grid") {
  const auto spec = GridSpec::centered(6, 6.0);  // 4x4 interior, unit spacing
  std::vector<Point> pts;
  for (int iy = 1; iy <= 4; ++iy)
    for (int ix = 1; ix <= 4; ++ix) pts.push_back(spec.position(ix, iy));
  const Eigen::MatrixXd cov = discrete_green_covariance(spec, pts);
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(16, 16);
  for (int a = 0; a < 16; ++a) {
    const int x = a % 4, y = a / 4;
    lap(a, a) = 4;
    if (x > 0) lap(a, a - 1) = -1;
    if (x < 3) lap(a, a + 1) = -1;
    if (y > 0) lap(a, a - 4) = -1;
    if (y < 3) lap(a, a + 4) = -1;
  }
  const Eigen::MatrixXd dense = 2 * std::numbers::pi * lap.inverse();
  CHECK((cov - dense).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("empirical dgff covariance matches the sparse-solve oracle") {
  const auto spec = GridSpec::centered(24, 1.0);
  const std::vector<Point> pts{{0.0, 0.0}, {0.1, 0.0}, {-0.2, 0.15}, {0.3, -0.3}, {0.05, 0.4}};
  const Eigen::MatrixXd exact = discrete_green_covariance(spec, pts);
  const int reps = 4000;
  std::vector<std::vector<double>> samples(pts.size(), std::vector<double>(reps));
  for (int r = 0; r < reps; ++r) {
    const FieldGrid f = sample_dgff(spec, 7, r);
    for (std::size_t p = 0; p < pts.size(); ++p) {
      const auto [ix, iy] = spec.nearest(pts[p]);
      samples[p][r] = f.at(ix, iy);
    }
  }
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a; b < pts.size(); ++b) {
      const auto est = stats::covariance(samples[a], samples[b]);
      CAPTURE(a);
      CAPTURE(b);
      CHECK(std::abs(est.value - exact(a, b)) <= 4 * est.stderr_);
    }
}

TEST_CASE("linear functionals of the field are gaussian") {
  const auto spec = GridSpec::centered(64, 2.0);
  const int reps = 600;
  std::vector<double> point(reps), avg(reps), diff(reps);
  for (int r = 0; r < reps; ++r) {
    const FieldGrid f = sample_dgff(spec, 11, r);
    point[r] = f.interpolate({0.1, 0.1});
    avg[r] = circle_average(f, Point(0, 0), 0.3);
    diff[r] = f.interpolate({-0.3, 0.2}) - f.interpolate({0.3, 0.2});
  }
  const double level = 0.01 / 3;  // Bonferroni across probes
  CHECK(stats::jarque_bera_pvalue(point) > level);
  CHECK(stats::jarque_bera_pvalue(avg) > level);
  CHECK(stats::jarque_bera_pvalue(diff) > level);
}

TEST_CASE("circle average preserves constants and is linear") {
  const auto spec = GridSpec::centered(64, 2.0);
  const auto c = FieldGrid::constant(spec, 1.75);
  CHECK(circle_average(c, Point(0.1, -0.2), 0.3) == doctest::Approx(1.75).epsilon(1e-14));

  const FieldGrid f = sample_dgff(spec, 1, 0);
  const FieldGrid g = sample_dgff(spec, 2, 0);
  FieldGrid sum{spec, f.values + g.values};
  const double lhs = circle_average(sum, Point(0.05, 0.02), 0.41);
  const double rhs = circle_average(f, Point(0.05, 0.02), 0.41) +
                     circle_average(g, Point(0.05, 0.02), 0.41);
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
}

TEST_CASE("circle average rejects unresolved or escaping circles") {
  const auto spec = GridSpec::centered(64, 2.0);
  const auto c = FieldGrid::constant(spec, 0.0);
  CHECK_THROWS_AS(circle_average(c, Point(0, 0), 1.5 * spec.spacing), PreconditionError);
  CHECK_THROWS_AS(circle_average(c, Point(0, 0), 0.9), PreconditionError);
  CHECK_NOTHROW(circle_average(c, Point(0, 0), 2 * spec.spacing));
  CHECK(circle_points(0.01, 0.1) == 64);
  CHECK(circle_points(1.0, 0.01) == 629);
}

TEST_CASE("circle average series") {
  const auto spec = GridSpec::centered(128, 2.0);
  SUBCASE("constant field") {
    const auto c = FieldGrid::constant(spec, -0.5);
    const auto s = circle_average_series(c, Point(0, 0), 1.0, 2.5, 0.5);
    REQUIRE(s.averages.size() == 4);
    for (double v : s.averages) CHECK(v == doctest::Approx(-0.5));
    for (double v : s.recentered()) CHECK(v == doctest::Approx(0.0));
    for (std::size_t i = 1; i < s.radii.size(); ++i) CHECK(s.radii[i] < s.radii[i - 1]);
  }
  SUBCASE("dt wider than the range gives one entry") {
    const auto c = FieldGrid::constant(spec, 2.0);
    const auto s = circle_average_series(c, Point(0, 0), 1.0, 1.3, 0.5);
    CHECK(s.averages.size() == 1);
    CHECK(s.base_value == doctest::Approx(2.0));
  }
  SUBCASE("recentered dgff series has gaussian increments with variance ~ dt") {
    const int reps = 400;
    std::vector<double> inc(reps);
    for (int r = 0; r < reps; ++r) {
      const FieldGrid f = sample_dgff(spec, 5, r);
      const auto s = circle_average_series(f, Point(0, 0), 1.0, 2.0, 1.0);
      inc[r] = s.recentered().back();
    }
    CHECK(stats::jarque_bera_pvalue(inc) > 0.01);
    // Var of a one-unit log-radius increment is 1; generous Monte Carlo band.
    CHECK(stats::variance(inc) == doctest::Approx(1.0).epsilon(0.2));
  }
}

TEST_CASE("correlation screen detector self-checks") {
  const int reps = 2000;
  KeyedNormals a(1, 0), b(2, 0);
  std::vector<double> x(reps), y(reps);
  for (int i = 0; i < reps; ++i) x[i] = a(i), y[i] = b(i);
  const auto indep = correlation_screen(x, {y});
  CHECK(indep.independent);
  CHECK(indep.null_band == doctest::Approx(3.0 / std::sqrt(2000.0)));
  const auto dep = correlation_screen(x, {y, x});
  CHECK_FALSE(dep.independent);
  CHECK(dep.max_abs_correlation == doctest::Approx(1.0));
}

TEST_CASE("radial increment is uncorrelated with recentered interior probes") {
  const auto spec = GridSpec::centered(128, 2.0);
  IndependenceConfig cfg;
  cfg.replicates = 400;
  cfg.seed = 17;
  const auto rep = radial_lateral_independence_test(spec, cfg);
  CHECK(rep.correlations.size() == 4);
  CHECK(rep.independent);
  cfg.dependent_control = true;
  CHECK_FALSE(radial_lateral_independence_test(spec, cfg).independent);
  cfg.replicates = 100;
  CHECK_THROWS_AS(radial_lateral_independence_test(spec, cfg), PreconditionError);
}

TEST_CASE("binary field round trip") {
  const auto spec = GridSpec::centered(16, 1.0, Point(0.25, -0.5));
  const FieldGrid f = sample_dgff(spec, 123, 0);
  std::stringstream buf;
  write_field(buf, f, 0.125);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 8) == "LFPPFLD1");
  CHECK(bytes.size() == 8 + 4 + 4 + 8 + 16 + 4 + 8 + 16 * 16 * 8 + 8);
  const auto back = read_field(buf);
  CHECK(back.field.spec == spec);
  CHECK(back.field.seed == 123);
  CHECK((back.field.values == f.values).all());
  REQUIRE(back.epsilon.has_value());
  CHECK(*back.epsilon == 0.125);

  std::stringstream plain;
  write_field(plain, f);
  CHECK_FALSE(read_field(plain).epsilon.has_value());
  std::stringstream bad("NOTAFILE");
  CHECK_THROWS(read_field(bad));
}

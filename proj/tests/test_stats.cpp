#include "doctest.h"

#include <cmath>
#include <vector>

#include "lfpp/error.hpp"
#include "lfpp/stats.hpp"

namespace st = lfpp::stats;

TEST_CASE("ols recovers an exact line") {
  std::vector<double> x{0, 1, 2, 3, 4}, y;
  for (double v : x) y.push_back(2.5 - 0.75 * v);
  const auto fit = st::ols(x, y);
  CHECK(fit.slope == doctest::Approx(-0.75).epsilon(1e-14));
  CHECK(fit.intercept == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(fit.slope_stderr == doctest::Approx(0.0));
}

TEST_CASE("ols standard error matches the textbook formula") {
  std::vector<double> x{1, 2, 3, 4}, y{1.0, 2.2, 2.8, 4.1};
  const auto fit = st::ols(x, y);
  // by hand: sxx = 5, sxy = 4.95, intercept 0.05, residuals -0.04 0.17 -0.22 0.09
  CHECK(fit.slope == doctest::Approx(0.99));
  CHECK(fit.intercept == doctest::Approx(0.05));
  CHECK(fit.residual_ss == doctest::Approx(0.087));
  CHECK(fit.slope_stderr == doctest::Approx(std::sqrt(0.087 / 2 / 5)));
}

TEST_CASE("quantiles and median") {
  CHECK(st::median({3, 1, 2}) == 2);
  CHECK(st::median({4, 1, 2, 3}) == 2.5);
  CHECK(st::quantile({0, 10}, 0.25) == doctest::Approx(2.5));
  CHECK(st::iqr({1, 2, 3, 4, 5}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(st::median({}), lfpp::PreconditionError);
}

TEST_CASE("correlation of degenerate input is NaN") {
  std::vector<double> a{1, 1, 1, 1}, b{1, 2, 3, 4};
  CHECK(std::isnan(st::correlation(a, b)));
  CHECK(st::correlation(b, b) == doctest::Approx(1.0));
}

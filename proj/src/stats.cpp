#include "lfpp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lfpp/error.hpp"

namespace lfpp::stats {

double mean(std::span<const double> x) {
  require(!x.empty(), "mean of empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  require(x.size() >= 2, "variance needs at least two samples");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

double quantile(std::vector<double> x, double q) {
  require(!x.empty(), "quantile of empty sample");
  require(q >= 0.0 && q <= 1.0, "quantile level must lie in [0,1]");
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return x[lo] + frac * (x[hi] - x[lo]);
}

double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

double iqr(const std::vector<double>& x) { return quantile(x, 0.75) - quantile(x, 0.25); }

CovarianceEstimate covariance(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 3, "covariance needs matched samples (n >= 3)");
  const double mx = mean(x);
  const double my = mean(y);
  const auto n = static_cast<double>(x.size());
  std::vector<double> prod(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) prod[i] = (x[i] - mx) * (y[i] - my);
  const double c = std::accumulate(prod.begin(), prod.end(), 0.0) / (n - 1);
  return {c, std::sqrt(variance(prod) / n)};
}

double correlation(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 3, "correlation needs matched samples (n >= 3)");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

LinearFit ols(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "ols needs matched samples (n >= 2)");
  const auto n = static_cast<double>(x.size());
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0, "ols: regressor has zero spread");
  LinearFit fit;
  fit.n = static_cast<int>(x.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.predict(x[i]);
    fit.residual_ss += r * r;
  }
  fit.r_squared = syy > 0 ? 1.0 - fit.residual_ss / syy : 1.0;
  if (x.size() > 2) {
    const double s2 = fit.residual_ss / (n - 2);
    fit.slope_stderr = std::sqrt(s2 / sxx);
    fit.intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return fit;
}

double jarque_bera_pvalue(std::span<const double> x) {
  require(x.size() >= 8, "jarque-bera needs at least 8 samples");
  const double m = mean(x);
  const auto n = static_cast<double>(x.size());
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  const double jb = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
  return std::exp(-jb / 2.0);
}

}  // namespace lfpp::stats

#pragma once

#include <span>
#include <vector>

namespace lfpp::stats {

double mean(std::span<const double> x);
// Unbiased sample variance.
double variance(std::span<const double> x);
double stddev(std::span<const double> x);

// Exact order statistic for odd sizes, midpoint average otherwise.
double median(std::vector<double> x);
// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> x, double q);
double iqr(const std::vector<double>& x);

struct CovarianceEstimate {
  double value = 0.0;
  double stderr_ = 0.0;  // delta-method standard error of the sample covariance
};
CovarianceEstimate covariance(std::span<const double> x, std::span<const double> y);

// Pearson correlation; NaN when either input is degenerate.
double correlation(std::span<const double> x, std::span<const double> y);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  double residual_ss = 0.0;
  double r_squared = 0.0;
  int n = 0;

  double predict(double x) const { return intercept + slope * x; }
};

// Ordinary least squares y = a + b x with classical standard errors
// (zero when the fit is exact or n == 2).
LinearFit ols(std::span<const double> x, std::span<const double> y);

// Jarque-Bera normality test; returns the asymptotic chi^2(2) p-value.
double jarque_bera_pvalue(std::span<const double> x);

}  // namespace lfpp::stats

#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace membrane {

// Half the L1 distance; keys missing on one side count as 0.
double tv_distance(const std::map<std::string, double>& p, const std::map<std::string, double>& q);

struct Interval95 {
  double lo = 0.0;
  double hi = 1.0;
};

Interval95 wilson_interval(std::size_t successes, std::size_t trials, double level = 0.95);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t dof = 0;
};

// Pearson chi-square; expected counts must be positive.
TestResult chi_square(const std::vector<double>& counts, const std::vector<double>& expected);

// One-sample Kolmogorov-Smirnov test against a continuous cdf.
TestResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit ols(const std::vector<double>& x, const std::vector<double>& y);

// OLS of log y on log x.
LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace membrane

#include "membrane/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "membrane/error.hpp"

namespace membrane {

namespace {

// P(K > x) for the Kolmogorov distribution.
double kolmogorov_tail(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.0) {
    const double pi = 3.14159265358979323846;
    double s = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double m = 2.0 * k - 1.0;
      s += std::exp(-m * m * pi * pi / (8.0 * x * x));
    }
    return 1.0 - std::sqrt(2.0 * pi) / x * s;
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) s += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * x * x);
  return s;
}

}  // namespace

double tv_distance(const std::map<std::string, double>& p, const std::map<std::string, double>& q) {
  std::set<std::string> keys;
  for (const auto& [k, v] : p) keys.insert(k);
  for (const auto& [k, v] : q) keys.insert(k);
  double s = 0.0;
  for (const auto& k : keys) {
    const auto a = p.find(k);
    const auto b = q.find(k);
    s += std::abs((a == p.end() ? 0.0 : a->second) - (b == q.end() ? 0.0 : b->second));
  }
  return 0.5 * s;
}

Interval95 wilson_interval(std::size_t successes, std::size_t trials, double level) {
  if (trials == 0) fail(ErrorCode::InvalidArgument, "wilson interval needs trials > 0");
  if (successes > trials) fail(ErrorCode::InvalidArgument, "successes exceed trials");
  if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::InvalidArgument, "level must lie in (0,1)");
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * level);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double c = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double w = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  return {std::max(0.0, c - w), std::min(1.0, c + w)};
}

TestResult chi_square(const std::vector<double>& counts, const std::vector<double>& expected) {
  if (counts.size() != expected.size() || counts.size() < 2)
    fail(ErrorCode::InvalidArgument, "chi-square needs matching bins, at least two");
  TestResult r;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (!(expected[i] > 0.0)) fail(ErrorCode::InvalidArgument, "expected counts must be positive");
    const double d = counts[i] - expected[i];
    r.statistic += d * d / expected[i];
  }
  r.dof = counts.size() - 1;
  r.p_value = boost::math::gamma_q(0.5 * static_cast<double>(r.dof), 0.5 * r.statistic);
  return r;
}

TestResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) fail(ErrorCode::InvalidArgument, "KS test needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  TestResult r;
  r.statistic = d;
  // Asymptotic Kolmogorov law with Stephens' small-sample correction.
  const double sn = std::sqrt(n);
  const double x = (sn + 0.12 + 0.11 / sn) * d;
  r.p_value = std::clamp(kolmogorov_tail(x), 0.0, 1.0);
  return r;
}

LineFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorCode::InvalidArgument, "ols needs two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) fail(ErrorCode::InvalidArgument, "ols needs distinct x values");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
  return f;
}

LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) fail(ErrorCode::InvalidArgument, "log-log fit needs positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return ols(lx, ly);
}

}  // namespace membrane

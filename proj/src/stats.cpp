#include "csbp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csbp {

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

double ks_statistic(std::vector<double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max(d, std::max(f - i / n, (i + 1) / n - f));
  }
  return d;
}

double kolmogorov_pvalue(double d, double n_eff) {
  if (d < 0.0 || n_eff <= 0.0) throw std::invalid_argument("kolmogorov_pvalue: bad arguments");
  const double rn = std::sqrt(n_eff);
  const double lam = (rn + 0.12 + 0.11 / rn) * d;
  if (lam < 1e-3) return 1.0;
  if (lam < 1.18) {
    const double y = std::exp(-M_PI * M_PI / (8.0 * lam * lam));
    const double q = std::sqrt(2.0 * M_PI) / lam *
                     (y + std::pow(y, 9.0) + std::pow(y, 25.0) + std::pow(y, 49.0));
    return std::clamp(1.0 - q, 0.0, 1.0);
  }
  const double x = std::exp(-2.0 * lam * lam);
  const double p = 2.0 * (x - std::pow(x, 4.0) + std::pow(x, 9.0) - std::pow(x, 16.0));
  return std::clamp(p, 0.0, 1.0);
}

namespace {
void require_size(std::size_t n) {
  if (n < 100)
    throw std::invalid_argument("ks test: sample sizes below 100 are degenerate here");
}
}  // namespace

double two_sample_ks(const std::vector<double>& a, const std::vector<double>& b) {
  require_size(a.size());
  require_size(b.size());
  const double d = ks_statistic(a, b);
  const double n_eff = static_cast<double>(a.size()) * static_cast<double>(b.size()) /
                       static_cast<double>(a.size() + b.size());
  return kolmogorov_pvalue(d, n_eff);
}

double one_sample_ks(const std::vector<double>& a, const std::function<double(double)>& cdf) {
  require_size(a.size());
  return kolmogorov_pvalue(ks_statistic(a, cdf), static_cast<double>(a.size()));
}

double z_test(double mean, double se, double target) {
  if (se < 0.0) throw std::invalid_argument("z_test: negative standard error");
  if (se == 0.0) {
    if (mean == target) return 0.0;
    throw std::invalid_argument("z_test: zero standard error with nonzero deviation");
  }
  return (mean - target) / se;
}

double lag1_autocorrelation(const std::vector<double>& x) {
  if (x.size() < 3) throw std::invalid_argument("lag1_autocorrelation: need >= 3 points");
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mean;
    den += d * d;
    if (i + 1 < x.size()) num += d * (x[i + 1] - mean);
  }
  if (den == 0.0) throw std::invalid_argument("lag1_autocorrelation: constant sample");
  return num / den;
}

}  // namespace csbp

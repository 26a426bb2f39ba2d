#pragma once

#include <functional>
#include <vector>

namespace csbp {

/// Two-sample Kolmogorov-Smirnov statistic (copies are sorted internally).
double ks_statistic(std::vector<double> a, std::vector<double> b);
/// One-sample statistic against an analytic CDF.
double ks_statistic(std::vector<double> a, const std::function<double(double)>& cdf);

/// Asymptotic Kolmogorov tail probability with the usual finite-sample
/// adjustment lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) * d.
double kolmogorov_pvalue(double d, double n_eff);

/// p-values; preconditions: sample sizes >= 100 (degenerate samples are an
/// error, the asymptotic p-value is meaningless there).
double two_sample_ks(const std::vector<double>& a, const std::vector<double>& b);
double one_sample_ks(const std::vector<double>& a, const std::function<double(double)>& cdf);

/// (mean - target)/se; 0 when se = 0 and the mean is exact.
double z_test(double mean, double se, double target);

/// Lag-1 sample autocorrelation (renewal-independence proxy).
double lag1_autocorrelation(const std::vector<double>& x);

}  // namespace csbp

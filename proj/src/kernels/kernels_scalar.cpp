#include <cmath>
#include <cstddef>
#include <span>

#include "kernels_internal.hpp"

namespace csbp::kernels::detail {
namespace {

// Pairwise reduction keeps the rounding error O(log n) and, more importantly
// here, makes the result independent of how replicas were produced.
double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

double reduce_sum_scalar(std::span<const double> x) { return pairwise_sum(x.data(), x.size()); }

void exp_neg_moments_scalar(std::span<const double> x, double lambda, double& sum, double& sum_sq) {
  // Block the stream so the accumulation order matches the AVX2 variant's
  // block structure up to per-lane rounding.
  constexpr std::size_t kBlock = 1024;
  double total = 0.0, total_sq = 0.0;
  const std::size_t n = x.size();
  for (std::size_t b = 0; b < n; b += kBlock) {
    const std::size_t end = b + kBlock < n ? b + kBlock : n;
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = b; i < end; ++i) {
      const double y = std::exp(-lambda * x[i]);
      s += y;
      s2 += y * y;
    }
    total += s;
    total_sq += s2;
  }
  sum = total;
  sum_sq = total_sq;
}

void convolve_scalar(std::span<const double> f, std::span<const double> g, double h,
                     std::span<double> out) {
  const std::size_t n = f.size();
  if (n == 0) return;
  out[0] = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    double acc = 0.5 * (f[k] * g[0] + f[0] * g[k]);
    for (std::size_t j = 1; j < k; ++j) acc += f[k - j] * g[j];
    out[k] = h * acc;
  }
}

}  // namespace

const KernelTable scalar_table = {reduce_sum_scalar, exp_neg_moments_scalar, convolve_scalar};

}  // namespace csbp::kernels::detail

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <thread>
#include <vector>

#include "csbp/kernels.hpp"
#include "csbp/rng.hpp"

namespace csbp {

inline int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(hw == 0 ? 1 : (hw > 8 ? 8 : hw));
}

/// Replica fan-out: replica i draws from base.split(i), results land at
/// index i. Output is byte-identical for any thread count.
template <typename Fn>
std::vector<double> mc_samples(std::uint64_t n, const RngStream& base, int threads, Fn&& fn) {
  std::vector<double> out(n);
  const int nt = resolve_threads(threads);
  if (nt <= 1 || n < 256) {
    for (std::uint64_t i = 0; i < n; ++i) {
      RngStream r = base.split(i);
      out[i] = fn(r);
    }
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const std::uint64_t chunk = (n + nt - 1) / nt;
  for (int w = 0; w < nt; ++w) {
    const std::uint64_t lo = w * chunk;
    const std::uint64_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      for (std::uint64_t i = lo; i < hi; ++i) {
        RngStream r = base.split(i);
        out[i] = fn(r);
      }
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

struct McSummary {
  double mean = 0.0;
  double std_err = 0.0;
  std::uint64_t n = 0;
};

inline McSummary summarize(std::span<const double> x) {
  McSummary s;
  s.n = x.size();
  if (s.n == 0) return s;
  const double sum = kernels::reduce_sum(x);
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  {
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - s.mean;
      sq[i] = d * d;
    }
    ss = kernels::reduce_sum(sq);
  }
  if (s.n > 1) s.std_err = std::sqrt(ss / (static_cast<double>(s.n) * (s.n - 1.0)));
  return s;
}

/// Mean and standard error of exp(-lambda * x_i) without materializing the
/// transformed array; the dominant cost (vector exp + reduction) sits in the
/// kernels backend.
inline McSummary summarize_exp_neg(std::span<const double> x, double lambda) {
  McSummary s;
  s.n = x.size();
  if (s.n == 0) return s;
  double sum = 0.0, sum_sq = 0.0;
  kernels::exp_neg_moments(x, lambda, sum, sum_sq);
  const double n = static_cast<double>(s.n);
  s.mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * s.mean * s.mean) / (n - 1.0));
  if (s.n > 1) s.std_err = std::sqrt(var / n);
  return s;
}

}  // namespace csbp

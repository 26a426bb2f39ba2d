#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <span>

#include "kernels_internal.hpp"

namespace csbp::kernels::detail {
namespace {

// exp for 4 doubles, Cephes-style rational approximation on the reduced
// argument, 2^n scaling through the exponent bits. ~1-2 ulp on [-708, 709];
// inputs below the normal range return 0 (the scalar path may return a
// denormal there, see the equivalence-test tolerance).
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d max_x = _mm256_set1_pd(709.436);
  const __m256d min_x = _mm256_set1_pd(-708.396);

  __m256d xc = _mm256_min_pd(_mm256_max_pd(x, min_x), max_x);
  __m256d nf =
      _mm256_round_pd(_mm256_mul_pd(xc, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(nf, ln2_hi, xc);
  r = _mm256_fnmadd_pd(nf, ln2_lo, r);

  const __m256d r2 = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
  q = _mm256_fmadd_pd(q, r2, _mm256_set1_pd(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, r2, _mm256_set1_pd(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, r2, _mm256_set1_pd(2.00000000000000000005e0));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_add_pd(_mm256_add_pd(e, e), _mm256_set1_pd(1.0));

  const __m128i n32 = _mm256_cvtpd_epi32(nf);
  const __m256i n64 = _mm256_cvtepi32_epi64(n32);
  const __m256i pow2 = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  e = _mm256_mul_pd(e, _mm256_castsi256_pd(pow2));

  const __m256d flushed = _mm256_cmp_pd(x, min_x, _CMP_LT_OQ);
  return _mm256_andnot_pd(flushed, e);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double block_sum(const double* x, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
    a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x + i + 4));
  }
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += x[i];
  return s;
}

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 128) return block_sum(x, n);
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

double reduce_sum_avx2(std::span<const double> x) { return pairwise_sum(x.data(), x.size()); }

void exp_neg_moments_avx2(std::span<const double> x, double lambda, double& sum, double& sum_sq) {
  constexpr std::size_t kBlock = 1024;
  const __m256d neg_l = _mm256_set1_pd(-lambda);
  const std::size_t n = x.size();
  double total = 0.0, total_sq = 0.0;
  for (std::size_t b = 0; b < n; b += kBlock) {
    const std::size_t end = b + kBlock < n ? b + kBlock : n;
    __m256d vs = _mm256_setzero_pd(), vs2 = _mm256_setzero_pd();
    std::size_t i = b;
    for (; i + 4 <= end; i += 4) {
      const __m256d y = exp_pd(_mm256_mul_pd(neg_l, _mm256_loadu_pd(x.data() + i)));
      vs = _mm256_add_pd(vs, y);
      vs2 = _mm256_fmadd_pd(y, y, vs2);
    }
    double s = hsum(vs), s2 = hsum(vs2);
    for (; i < end; ++i) {
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

void convolve_avx2(std::span<const double> f, std::span<const double> g, double h,
                   std::span<double> out) {
  const std::size_t n = f.size();
  if (n == 0) return;
  out[0] = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    double acc = 0.5 * (f[k] * g[0] + f[0] * g[k]);
    __m256d vacc = _mm256_setzero_pd();
    std::size_t j = 1;
    // f is walked backwards: load 4 contiguous values ending at f[k-j] and reverse.
    for (; j + 4 <= k; j += 4) {
      const __m256d gv = _mm256_loadu_pd(g.data() + j);
      __m256d fv = _mm256_loadu_pd(f.data() + (k - j - 3));
      fv = _mm256_permute4x64_pd(fv, _MM_SHUFFLE(0, 1, 2, 3));
      vacc = _mm256_fmadd_pd(fv, gv, vacc);
    }
    acc += hsum(vacc);
    for (; j < k; ++j) acc += f[k - j] * g[j];
    out[k] = h * acc;
  }
}

}  // namespace

const KernelTable avx2_table = {reduce_sum_avx2, exp_neg_moments_avx2, convolve_avx2};

}  // namespace csbp::kernels::detail

#endif  // x86_64

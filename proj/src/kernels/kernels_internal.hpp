#pragma once

#include <cstddef>
#include <span>

namespace csbp::kernels::detail {

struct KernelTable {
  double (*reduce_sum)(std::span<const double>);
  void (*exp_neg_moments)(std::span<const double>, double, double&, double&);
  void (*convolve_prefix_trapezoid)(std::span<const double>, std::span<const double>, double,
                                    std::span<double>);
};

extern const KernelTable scalar_table;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable avx2_table;
#endif

}  // namespace csbp::kernels::detail

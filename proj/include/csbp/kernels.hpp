#pragma once

#include <cstddef>
#include <span>
#include <string>

// Data-parallel arithmetic core. Every kernel has a scalar reference
// implementation and (on x86-64) an AVX2 variant; the active backend is
// selected at runtime from CPU features, the CSBP_KERNELS environment
// variable (scalar|avx2|auto), or set_backend(). Variants are
// equivalence-tested against the scalar reference in tests/test_kernels.cpp.
namespace csbp::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
void set_backend(Backend b);        // throws if unavailable on this CPU
bool avx2_available();
std::string backend_name();

/// Blocked pairwise sum; result independent of thread/vector width up to
/// the documented tolerance (see tests).
double reduce_sum(std::span<const double> x);

/// First two power sums of exp(-lambda*x_i): sum and sum of squares.
/// Backbone of every Laplace-transform Monte Carlo check.
void exp_neg_moments(std::span<const double> x, double lambda, double& sum, double& sum_sq);

/// Prefix trapezoid convolution on a uniform grid with step h:
///   out[k] = h * ( f[k]g[0]/2 + sum_{j=1..k-1} f[k-j]g[j] + f[0]g[k]/2 ),  out[0] = 0.
/// f, g, out have equal length n. Used for iterated measure convolutions.
void convolve_prefix_trapezoid(std::span<const double> f, std::span<const double> g, double h,
                               std::span<double> out);

}  // namespace csbp::kernels

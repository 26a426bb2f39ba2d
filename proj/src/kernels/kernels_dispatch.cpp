#include "csbp/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <string>

#include "kernels_internal.hpp"

namespace csbp::kernels {
namespace {

std::atomic<const detail::KernelTable*> g_table{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};
std::once_flag g_init;

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

void apply(Backend b) {
#if defined(__x86_64__) || defined(_M_X64)
  if (b == Backend::avx2) {
    g_table.store(&detail::avx2_table);
    g_backend.store(Backend::avx2);
    return;
  }
#endif
  g_table.store(&detail::scalar_table);
  g_backend.store(Backend::scalar);
}

void init() {
  std::call_once(g_init, [] {
    Backend b = cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
    if (const char* env = std::getenv("CSBP_KERNELS")) {
      const std::string v(env);
      if (v == "scalar") b = Backend::scalar;
      else if (v == "avx2" && cpu_has_avx2()) b = Backend::avx2;
      // anything else (including "auto") keeps the detected default
    }
    apply(b);
  });
}

const detail::KernelTable& table() {
  init();
  return *g_table.load();
}

}  // namespace

bool avx2_available() { return cpu_has_avx2(); }

Backend active_backend() {
  init();
  return g_backend.load();
}

std::string backend_name() { return active_backend() == Backend::avx2 ? "avx2" : "scalar"; }

void set_backend(Backend b) {
  init();
  if (b == Backend::avx2 && !cpu_has_avx2())
    throw std::runtime_error("kernels: avx2 backend not available on this CPU");
  apply(b);
}

double reduce_sum(std::span<const double> x) { return table().reduce_sum(x); }

void exp_neg_moments(std::span<const double> x, double lambda, double& sum, double& sum_sq) {
  table().exp_neg_moments(x, lambda, sum, sum_sq);
}

void convolve_prefix_trapezoid(std::span<const double> f, std::span<const double> g, double h,
                               std::span<double> out) {
  if (f.size() != g.size() || f.size() != out.size())
    throw std::invalid_argument("convolve_prefix_trapezoid: size mismatch");
  table().convolve_prefix_trapezoid(f, g, h, out);
}

}  // namespace csbp::kernels

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace csbp {

/// Counter-based splittable random stream. The state is derived from a
/// (seed, stream) pair by strong 64-bit mixing; advancing applies the
/// SplitMix64 sequence. Identical (seed, stream) gives a byte-identical
/// draw sequence on every platform and under any thread schedule, so each
/// Monte Carlo replica and each grid cell can own an independent stream
/// with no synchronization.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : state_(mix(seed ^ 0x6a09e667f3bcc909ULL) +
               0x9e3779b97f4a7c15ULL * mix(stream ^ 0xbb67ae8584caa73bULL)),
        seed_(seed),
        stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Derive an independent child stream without disturbing this one.
  RngStream split(std::uint64_t child) const {
    return RngStream(seed_, mix(stream_ + 0x9e3779b97f4a7c15ULL * (child + 1)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double exponential() { return -std::log(uniform()); }
  double exponential(double rate) {
    if (rate <= 0.0) throw std::invalid_argument("exponential: rate must be positive");
    return -std::log(uniform()) / rate;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Poisson by multiplication for moderate means; larger means are split
  /// additively into chunks, which stays exact in law.
  std::uint64_t poisson(double mean) {
    if (mean < 0.0) throw std::invalid_argument("poisson: negative mean");
    if (mean == 0.0) return 0;
    std::uint64_t total = 0;
    while (mean > 32.0) {
      total += poisson_small(32.0);
      mean -= 32.0;
    }
    return total + poisson_small(mean);
  }

  /// Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 boosted via U^{1/shape}.
  double gamma(double shape) {
    if (shape <= 0.0) throw std::invalid_argument("gamma: shape must be positive");
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t poisson_small(double mean) {
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = uniform();
    while (p > limit) {
      ++k;
      p *= uniform();
    }
    return k;
  }

  std::uint64_t state_;
  std::uint64_t seed_;
  std::uint64_t stream_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace csbp

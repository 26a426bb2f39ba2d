#pragma once

// Closed-form oracles used by the tests, independent of the library's
// numerical paths (the library integrates/ inverts; these are algebra).

#include <cmath>

namespace oracles {

// sigma2 = 2, gamma = 1 throughout.
inline double feller_v(double t, double lam) {
  const double e = std::exp(-t);
  return lam * e / (1.0 + lam * (1.0 - e));
}
inline double feller_v_inf(double t) { return 1.0 / std::expm1(t); }
inline double feller_inv_psi(double a, double b) {  // int_a^b du/(u(u+1))
  return std::log(b / (b + 1.0)) - std::log(a / (a + 1.0));
}
inline double feller_kappa_inf(double q) { return q / (q + 1.0); }
inline double feller_c_theta1(double q) { return (q + 1.0) / (2.0 * q); }
inline double feller_f1(double x) { return 0.5 * (1.0 + x); }

// gamma = 1.
inline double neveu_v(double t, double lam) {
  return std::expm1(std::exp(-t) * std::log1p(lam));
}
inline double neveu_inv_psi(double a, double b) {
  return std::log(std::log1p(b)) - std::log(std::log1p(a));
}

// One-sided stable, alpha = 1/2, Laplace scale c: CDF of c^2/(2 Z^2).
inline double levy_half_cdf(double c, double x) { return std::erfc(c / (2.0 * std::sqrt(x))); }

inline double exp_cdf(double rate, double x) { return -std::expm1(-rate * x); }

// Density of the inverse limit at level x for the Feller(2,1) mechanism.
inline double feller_g_inf(double x, double u) {
  return std::exp(-u - x) * std::cyl_bessel_i(0.0, 2.0 * std::sqrt(u * x));
}

}  // namespace oracles

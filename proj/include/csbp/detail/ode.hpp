#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csbp::detail {

/// Adaptive embedded Runge-Kutta (Cash-Karp 4(5)) for a scalar autonomous
/// ODE y' = f(y), integrated from y(0)=y0 over [0, t]. Step control on the
/// embedded error estimate with mixed absolute/relative tolerance. The
/// right-hand sides here are smooth and sign-definite, so a scalar solver
/// with PI-free step control is enough; long-time accuracy is pinned
/// elsewhere by a quadrature root-polish.
template <typename F>
double integrate_ode(const F& f, double y0, double t, double rel_tol, double abs_tol,
                     double min_y = 0.0) {
  if (t < 0.0) throw std::invalid_argument("integrate_ode: negative horizon");
  if (t == 0.0) return y0;

  static constexpr double a2 = 0.2, a3 = 0.3, a4 = 0.6, a5 = 1.0, a6 = 0.875;
  static constexpr double b21 = 0.2;
  static constexpr double b31 = 3.0 / 40.0, b32 = 9.0 / 40.0;
  static constexpr double b41 = 0.3, b42 = -0.9, b43 = 1.2;
  static constexpr double b51 = -11.0 / 54.0, b52 = 2.5, b53 = -70.0 / 27.0, b54 = 35.0 / 27.0;
  static constexpr double b61 = 1631.0 / 55296.0, b62 = 175.0 / 512.0, b63 = 575.0 / 13824.0,
                          b64 = 44275.0 / 110592.0, b65 = 253.0 / 4096.0;
  static constexpr double c1 = 37.0 / 378.0, c3 = 250.0 / 621.0, c4 = 125.0 / 594.0,
                          c6 = 512.0 / 1771.0;
  static constexpr double d1 = c1 - 2825.0 / 27648.0, d3 = c3 - 18575.0 / 48384.0,
                          d4 = c4 - 13525.0 / 55296.0, d5 = -277.0 / 14336.0,
                          d6 = c6 - 0.25;
  (void)a2; (void)a3; (void)a4; (void)a5; (void)a6;  // autonomous rhs

  double y = y0;
  double s = 0.0;
  double h = t * 1e-3;
  const double h_min = t * 1e-14;
  int steps = 0;
  while (s < t) {
    if (++steps > 2000000) throw std::runtime_error("integrate_ode: step budget exceeded");
    h = std::min(h, t - s);
    const double k1 = f(y);
    const double k2 = f(y + h * b21 * k1);
    const double k3 = f(y + h * (b31 * k1 + b32 * k2));
    const double k4 = f(y + h * (b41 * k1 + b42 * k2 + b43 * k3));
    const double k5 = f(y + h * (b51 * k1 + b52 * k2 + b53 * k3 + b54 * k4));
    const double k6 = f(y + h * (b61 * k1 + b62 * k2 + b63 * k3 + b64 * k4 + b65 * k5));
    const double y5 = y + h * (c1 * k1 + c3 * k3 + c4 * k4 + c6 * k6);
    const double err = std::abs(h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6));
    const double scale = std::max(abs_tol, rel_tol * std::max(std::abs(y), std::abs(y5)));
    if (err <= scale || h <= h_min) {
      s += h;
      y = std::max(y5, min_y);
      const double grow = err > 0.0 ? 0.9 * std::pow(scale / err, 0.2) : 5.0;
      h *= std::clamp(grow, 0.2, 5.0);
    } else {
      h *= std::max(0.1, 0.9 * std::pow(scale / err, 0.25));
    }
  }
  return y;
}

}  // namespace csbp::detail

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace csbp::detail {

// Gauss-Kronrod 7-15 node pair on [-1, 1].
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,  0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,  0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,  0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,  0.000000000000000000000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,  0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,  0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,  0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,  0.209482141084727828012999174891714};
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,  0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,  0.417959183673469387755102040816327};

template <typename F>
void gk15(const F& f, double a, double b, double& result, double& err) {
  const double c = 0.5 * (a + b);
  const double hl = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - hl * kKronrodNodes[i]);
    fv[14 - i] = f(c + hl * kKronrodNodes[i]);
  }
  fv[7] = f(c);
  double kron = kKronrodWeights[7] * fv[7];
  double gauss = kGaussWeights[3] * fv[7];
  for (int i = 0; i < 7; ++i) {
    kron += kKronrodWeights[i] * (fv[i] + fv[14 - i]);
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (fv[i] + fv[14 - i]);
  }
  result = kron * hl;
  err = std::abs((kron - gauss) * hl);
}

/// Adaptive Gauss-Kronrod on [a, b], a <= b. Splits the worst interval until
/// the summed error estimate meets max(abs_tol, rel_tol*|integral|).
template <typename F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-12, double rel_tol = 1e-12,
                 int max_intervals = 4000) {
  if (!(a <= b)) throw std::invalid_argument("integrate: need a <= b");
  if (a == b) return 0.0;

  struct Seg {
    double a, b, val, err;
  };
  std::vector<Seg> segs;
  segs.reserve(64);

  // Pre-split wide ranges geometrically; the integrands here typically live
  // on logarithmic scales.
  std::vector<double> cuts{a};
  if (a > 0.0 && b / a > 16.0) {
    double x = a;
    while (x * 8.0 < b) {
      x *= 8.0;
      cuts.push_back(x);
    }
  }
  cuts.push_back(b);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Seg s{cuts[i], cuts[i + 1], 0, 0};
    gk15(f, s.a, s.b, s.val, s.err);
    segs.push_back(s);
  }

  while (static_cast<int>(segs.size()) < max_intervals) {
    double total = 0.0, total_err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      total += segs[i].val;
      total_err += segs[i].err;
      if (segs[i].err > segs[worst].err) worst = i;
    }
    if (total_err <= std::max(abs_tol, rel_tol * std::abs(total))) return total;
    Seg s = segs[worst];
    const double m = 0.5 * (s.a + s.b);
    if (m <= s.a || m >= s.b) {  // interval at rounding resolution
      segs[worst].err = 0.0;
      continue;
    }
    Seg left{s.a, m, 0, 0}, right{m, s.b, 0, 0};
    gk15(f, left.a, left.b, left.val, left.err);
    gk15(f, right.a, right.b, right.val, right.err);
    segs[worst] = left;
    segs.push_back(right);
  }
  double total = 0.0;
  for (const auto& s : segs) total += s.val;
  return total;  // best effort at the interval cap
}

/// Integral of f over (0, b] where f is integrable at 0 but possibly
/// unbounded there. Peels geometric shells toward 0 until their
/// contribution is negligible.
template <typename F>
double integrate_to_zero(const F& f, double b, double abs_tol = 1e-12, double rel_tol = 1e-12) {
  if (b <= 0.0) return 0.0;
  double total = integrate(f, b * 0.5, b, abs_tol * 0.5, rel_tol);
  double hi = b * 0.5;
  for (int k = 0; k < 400; ++k) {
    const double lo = hi * 0.5;
    const double piece = integrate(f, lo, hi, abs_tol * 0.25, rel_tol);
    total += piece;
    hi = lo;
    if (std::abs(piece) <= std::max(abs_tol, rel_tol * std::abs(total)) && k > 4) break;
  }
  return total;
}

/// Straight-line complex contour integral of f from z0 to z1 (15-point
/// Kronrod per panel, panel-halving to tolerance).
template <typename F>
std::complex<double> integrate_line(const F& f, std::complex<double> z0, std::complex<double> z1,
                                    double tol = 1e-12, int depth = 0) {
  const std::complex<double> dz = z1 - z0;
  auto g = [&](double s) { return f(z0 + s * dz); };
  std::complex<double> kron(0.0, 0.0), gauss(0.0, 0.0);
  for (int i = 0; i < 7; ++i) {
    const std::complex<double> lo = g(0.5 * (1.0 - kKronrodNodes[i]));
    const std::complex<double> hi = g(0.5 * (1.0 + kKronrodNodes[i]));
    kron += kKronrodWeights[i] * (lo + hi);
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (lo + hi);
  }
  const std::complex<double> mid = g(0.5);
  kron += kKronrodWeights[7] * mid;
  gauss += kGaussWeights[3] * mid;
  kron *= 0.5;
  gauss *= 0.5;
  if (std::abs(kron - gauss) <= tol * std::max(1.0, std::abs(kron)) || depth >= 24)
    return kron * dz;
  const std::complex<double> zm = z0 + 0.5 * dz;
  return integrate_line(f, z0, zm, tol * 0.5, depth + 1) +
         integrate_line(f, zm, z1, tol * 0.5, depth + 1);
}

}  // namespace csbp::detail

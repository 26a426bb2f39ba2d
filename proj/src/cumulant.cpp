#include "csbp/cumulant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "csbp/detail/ode.hpp"
#include "csbp/detail/quadrature.hpp"

namespace csbp {

CumulantSolver::CumulantSolver(BranchingMechanism m, double ode_tol, double quad_tol)
    : mech_(std::move(m)), ode_tol_(ode_tol), quad_tol_(quad_tol) {
  if (!(ode_tol > 0.0) || !(quad_tol > 0.0))
    throw std::invalid_argument("CumulantSolver: tolerances must be positive");
}

double CumulantSolver::h0(double u) const {
  // (Psi(u) - gamma u) / (gamma u Psi(u)), cancellation-free
  const double above = mech_.psi_above_linear(u);
  const double psi = mech_.gamma() * u + above;
  return above / (mech_.gamma() * u * psi);
}

double CumulantSolver::integral_ordered(double a, double b) const {
  // Integrated as precisely as feasible regardless of quad_tol_: downstream
  // Gaver-Stehfest inversion amplifies transform noise by ~1e7, so the
  // transform layer must sit near machine precision. quad_tol_ governs the
  // root-solve residuals, not this quadrature.
  const double log_part = std::log(b / a) / mech_.gamma();
  const double corr =
      detail::integrate([this](double u) { return h0(u); }, a, b, 1e-14, 2e-15);
  return log_part - corr;
}

double CumulantSolver::inv_psi_integral(double a, double b) const {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("inv_psi_integral: bounds must be positive");
  if (a == b) return 0.0;
  return a < b ? integral_ordered(a, b) : -integral_ordered(b, a);
}

double CumulantSolver::tail_integral(double a) const {
  // u -> 1/w: int_a^inf du/Psi(u) = int_0^{1/a} dw / (w^2 Psi(1/w))
  return detail::integrate_to_zero(
      [this](double w) { return 1.0 / mech_.psi_tail_scaled(w); }, 1.0 / a, 1e-14, 2e-15);
}

ExtReal CumulantSolver::inv_psi_integral_to_inf(double a) const {
  if (!(a > 0.0)) throw std::invalid_argument("inv_psi_integral: bounds must be positive");
  if (!mech_.grey_holds()) return ExtReal::infinity();
  return ExtReal(tail_integral(a));
}

double CumulantSolver::v(double t, double lam) const {
  if (t < 0.0) throw std::invalid_argument("v: negative time");
  if (!(lam > 0.0)) throw std::invalid_argument("v: lambda must be positive");
  if (t == 0.0) return lam;
  const double est = detail::integrate_ode(
      [this](double y) { return -mech_.psi(std::max(y, 0.0)); }, lam, t, ode_tol_, lam * 1e-280,
      lam * 1e-280);
  return v(t, lam, est);
}

double CumulantSolver::v(double t, double lam, double guess) const {
  if (t < 0.0) throw std::invalid_argument("v: negative time");
  if (!(lam > 0.0)) throw std::invalid_argument("v: lambda must be positive");
  if (t == 0.0) return lam;

  // Newton in log space on  r(v) = int_v^lam du/Psi - t,  r'(v) = -1/Psi(v),
  // bracket-safeguarded. Multiplicative updates keep v positive.
  double lo = 0.0, hi = lam;  // r(lo)=+inf side, r(hi) = -t < 0
  double vcur = std::clamp(guess, lam * 1e-280, lam);
  for (int it = 0; it < 200; ++it) {
    const double r = inv_psi_integral(vcur, lam) - t;
    if (std::abs(r) <= quad_tol_) return vcur;
    if (r > 0.0) lo = std::max(lo, vcur);
    else hi = std::min(hi, vcur);
    const double step = std::clamp(r * mech_.psi(vcur) / vcur, -30.0, 30.0);
    double next = vcur * std::exp(step);
    if (!(next > lo && next < hi)) next = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
    if (next == vcur) return vcur;
    vcur = next;
  }
  return vcur;
}

ExtReal CumulantSolver::v_inf(double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("v_inf: t must be positive");
  if (!mech_.grey_holds()) return ExtReal::infinity();

  // Solve int_v^inf du/Psi = t; the map is decreasing in v.
  double vcur = 1.0;
  double r = tail_integral(vcur) - t;
  double lo = 0.0, hi = 0.0;
  if (r > 0.0) {  // v too small
    lo = vcur;
    while (r > 0.0) {
      vcur *= 8.0;
      r = tail_integral(vcur) - t;
      if (r > 0.0) lo = vcur;
      if (vcur > 1e300) throw std::runtime_error("v_inf: bracket search overflow");
    }
    hi = vcur;
  } else {
    hi = vcur;
    while (r < 0.0) {
      vcur /= 8.0;
      r = tail_integral(vcur) - t;
      if (r < 0.0) hi = vcur;
      if (vcur < 1e-300) throw std::runtime_error("v_inf: bracket search underflow");
    }
    lo = vcur;
  }
  for (int it = 0; it < 200; ++it) {
    r = tail_integral(vcur) - t;
    if (std::abs(r) <= quad_tol_) return ExtReal(vcur);
    if (r > 0.0) lo = std::max(lo, vcur);
    else hi = std::min(hi, vcur);
    const double step = std::clamp(r * mech_.psi(vcur) / vcur, -30.0, 30.0);
    double next = vcur * std::exp(step);
    if (!(next > lo && next < hi)) next = std::sqrt(lo * hi);
    if (next == vcur) return ExtReal(vcur);
    vcur = next;
  }
  return ExtReal(vcur);
}

double CumulantSolver::kappa_lambda(double lam, double theta) const {
  if (!(lam > 0.0) || !(theta > 0.0))
    throw std::invalid_argument("kappa_lambda: arguments must be positive");
  return std::exp(-mech_.gamma() * inv_psi_integral(theta, lam));
}

double CumulantSolver::kappa_inf(double theta) const {
  if (!(theta > 0.0)) throw std::invalid_argument("kappa_inf: theta must be positive");
  if (!mech_.grey_holds())
    throw std::domain_error("kappa_inf: requires Grey's condition (int^inf du/Psi < inf)");
  return std::exp(-mech_.gamma() * tail_integral(theta));
}

double CumulantSolver::llogl_integral(double theta) const {
  return detail::integrate_to_zero([this](double u) { return h0(u); }, theta, 1e-14, 2e-15);
}

double CumulantSolver::kappa_llogl(double theta) const {
  if (theta < 0.0) throw std::invalid_argument("kappa_llogl: theta must be >= 0");
  if (!mech_.llogl_holds())
    throw std::domain_error("kappa_llogl: requires the L log L condition");
  if (theta == 0.0) return 0.0;
  return theta * std::exp(-mech_.gamma() * llogl_integral(theta));
}

double CumulantSolver::c_lambda(double lam) const {
  if (!(lam > 0.0)) throw std::invalid_argument("c_lambda: lambda must be positive");
  if (!mech_.llogl_holds())
    throw std::domain_error("c_lambda: requires the L log L condition");
  return lam * std::exp(-mech_.gamma() * llogl_integral(lam));
}

double CumulantSolver::c_ratio(double lam, double lam2) const {
  if (!(lam > 0.0) || !(lam2 > 0.0))
    throw std::invalid_argument("c_ratio: arguments must be positive");
  return std::exp(mech_.gamma() * inv_psi_integral(lam2, lam));
}

ExtReal CumulantSolver::limit_levy_mass(double lam) const {
  if (!(lam > 0.0)) throw std::invalid_argument("limit_levy_mass: lambda must be positive");
  if (!mech_.grey_holds()) return ExtReal::infinity();
  return ExtReal(std::exp(mech_.gamma() * tail_integral(lam)));
}

std::complex<double> CumulantSolver::inv_psi_integral(double a, std::complex<double> z) const {
  if (!(a > 0.0)) throw std::invalid_argument("inv_psi_integral: lower bound must be positive");
  const auto recip_psi = [this](std::complex<double> u) { return 1.0 / mech_.psi(u); };
  // L-shaped path a -> a + i Im(z) -> z keeps clear of the branch cut and the
  // zeros of Psi on (-inf, 0].
  const std::complex<double> corner(a, z.imag());
  return detail::integrate_line(recip_psi, std::complex<double>(a, 0.0), corner, 1e-12) +
         detail::integrate_line(recip_psi, corner, z, 1e-12);
}

}  // namespace csbp

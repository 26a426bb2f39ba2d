#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "csbp/cumulant.hpp"
#include "csbp/extended_real.hpp"
#include "csbp/rng.hpp"

namespace csbp {

/// A Laplace transform handed to the numerical inverter. eval must be
/// finite on (0, inf); eval_complex, when present, is an analytic
/// continuation valid off the negative real axis and enables the Talbot
/// fallback.
struct TransformFn {
  std::function<double(double)> eval;
  std::function<std::complex<double>(std::complex<double>)> eval_complex;
  bool completely_monotone = false;
};

enum class InversionKind { mass_function, tail, density };

struct InversionOptions {
  int gs_order = 14;          // even, in [8, 16]
  double rel_tol = 3e-6;      // adjacent-order agreement target
  double abs_tol = 1e-10;
  bool allow_talbot = true;
  int talbot_points = 32;
  bool best_effort = false;   // return the best extrapolated value instead of throwing
};

struct InversionDiagnostics {
  int gs_order_used = 0;
  double gs_spread = 0.0;   // disagreement of the best adjacent-order pair
  bool used_talbot = false;
};

/// Gaver-Stehfest of order N (even): f(x) ~ (ln2/x) sum_k a_k F(k ln2 / x).
/// Real-axis evaluations only; weights are exact rationals accumulated in
/// 128-bit integers.
double gaver_stehfest(const std::function<double(double)>& transform, double x, int order);

/// Fixed-Talbot contour inversion; needs the complex continuation.
double fixed_talbot(const std::function<std::complex<double>(std::complex<double>)>& transform,
                    double x, int points);

/// Numerical inversion with cross-order Gaver-Stehfest agreement check and
/// Talbot fallback. Throws on non-convergence (with diagnostics in the
/// message) and on x <= 0. mass_function/tail/density results are clamped
/// at 0 to remove alternating-sum noise.
double invert_to_function(const TransformFn& transform, double x, InversionKind kind,
                          const InversionOptions& opts = {},
                          InversionDiagnostics* diag = nullptr);

/// c_theta(q) = exp(-theta int_1^q du/Psi), the Laplace transform of the
/// theta-invariant measure mu_theta; signed integral for q < 1, c_theta(1)=1.
double c_theta(const CumulantSolver& s, double theta, double q);
std::complex<double> c_theta(const CumulantSolver& s, double theta, std::complex<double> q);

/// f_theta(x) = mu_theta([0,x)), realized by inverting
/// xi_theta(q) = c_theta(q)/q. Non-decreasing, left-continuous, includes a
/// possible atom of mu_theta at 0. theta = 0 degenerates to the constant 1
/// (mu_0 = delta_0) and is an explicit branch. For x beyond the crossover
/// the regular-variation asymptotic replaces the inversion (crossover is
/// recorded on the object).
class InvariantFunction {
 public:
  InvariantFunction(const CumulantSolver& s, double theta, double asymptotic_crossover = 1e6);

  double operator()(double x) const;
  /// R(1/x)^theta / Gamma(1 + theta/gamma), the large-x equivalent.
  double asymptotic(double x) const;
  double theta() const { return theta_; }
  bool crossover_used() const { return crossover_used_; }

 private:
  const CumulantSolver* solver_;
  double theta_;
  double crossover_;
  mutable bool crossover_used_ = false;
};

double f_theta(const CumulantSolver& s, double theta, double x);

/// E_x[e^{-theta T_y}] for the lineage process via the invariant function:
/// f_theta(x)/f_theta(y), 0 < x <= y.
double hitting_time_lt(const CumulantSolver& s, double theta, double x, double y);

/// Tail of the Lévy measure of the limit subordinator W^lambda:
/// inverts kappa_lambda(q)/q. lam infinite (requires Grey) uses kappa_inf,
/// where nu_inf is the quasi-stationary law. Deep in the tail the value is
/// numerically indistinguishable from 0; pass an absolute tolerance scaled
/// to the total mass when probing there.
double levy_tail(const CumulantSolver& s, ExtReal lam, double x,
                 const InversionOptions& opts = {});
ExtReal levy_total_mass(const CumulantSolver& s, ExtReal lam);

struct McEstimate {
  double value = 0.0;
  double std_err = 0.0;
  std::uint64_t n = 0;
};

/// Monte Carlo evaluation of the density of the inverse limit process at
/// (x, u): mean of nu_bar_lam(x - W^lam_i(u)) over subordinator marginals
/// restricted to W < x.
McEstimate density_g(const CumulantSolver& s, ExtReal lam, double x, double u,
                     std::uint64_t mc_paths, const RngStream& rng, int threads = 0);

/// Series form of the density under Grey's condition:
///   g_x(u) = e^{-u} sum_n u^n/n! int_0^x nu_bar(x-z) nu^{*n}(dz),
/// with closed-form convolutions for the Feller mechanism and trapezoid grid
/// convolutions (step x/2048) otherwise. tail_bound, when provided, receives
/// the truncation bound for the dropped n > n_max terms.
double density_g_grey(const CumulantSolver& s, double x, double u, int n_max = 64,
                      bool force_grid = false, double* tail_bound = nullptr);

}  // namespace csbp

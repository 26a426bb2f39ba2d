#pragma once

#include <complex>
#include <string>
#include <variant>

#include "csbp/extended_real.hpp"

namespace csbp {

/// Jump law of a finite-activity Lévy measure: a named positive
/// distribution with density, Laplace transform and moments.
struct ExponentialJumps {
  double rate;  // mean 1/rate
};
struct GammaJumps {
  double shape;
  double rate;
};
using JumpLaw = std::variant<ExponentialJumps, GammaJumps>;

double jump_mean(const JumpLaw&);
double jump_laplace(const JumpLaw&, double u);
double jump_density(const JumpLaw&, double x);

/// pi(dx) = scale * x^{-alpha-1} e^{-tempering x} dx on (0, inf).
/// tempering = 0 is admitted only for alpha in (1,2): otherwise
/// int_1^inf x pi(dx) diverges and (x ∧ x²) is not integrable.
struct TemperedStable {
  double alpha;
  double scale;
  double tempering;
};

/// pi = rate * jumpLaw, a finite measure.
struct FiniteCompound {
  double rate;
  JumpLaw jumps;
};

/// monostate = no jump part (pure diffusion + drift).
using LevyMeasureSpec = std::variant<std::monostate, TemperedStable, FiniteCompound>;

/// Subcritical branching mechanism
///   Psi(u) = sigma^2/2 u^2 + gamma u + int_0^inf (e^{-ux} - 1 + ux) pi(dx),
/// gamma = Psi'(0+) > 0, convex, Psi(0) = 0. The jump integral is evaluated
/// in closed form per Lévy variant, never by quadrature. Two named
/// mechanisms are first class:
///   feller:  pi = 0, Psi(u) = sigma^2/2 u^2 + gamma u
///   neveu:   Psi(u) = gamma (u+1) log(u+1)  (its Lévy measure is never
///            materialized; all descriptors are closed form)
/// Immutable after construction; all operations are pure and thread-safe.
class BranchingMechanism {
 public:
  static BranchingMechanism feller(double sigma2, double gamma);
  static BranchingMechanism neveu(double gamma);
  static BranchingMechanism with_levy(double sigma2, double gamma, LevyMeasureSpec levy);

  double sigma2() const { return sigma2_; }
  double gamma() const { return gamma_; }
  const LevyMeasureSpec& levy() const { return levy_; }
  bool is_neveu() const { return neveu_; }
  bool is_feller() const { return !neveu_ && std::holds_alternative<std::monostate>(levy_); }
  std::string name() const;

  double psi(double u) const;
  /// Psi(u) - gamma*u >= 0, computed without cancellation near 0.
  double psi_above_linear(double u) const;
  /// w^2 * Psi(1/w) for w in (0, inf), stable against overflow of Psi at
  /// huge arguments (used by tail integrals after u -> 1/w substitution).
  double psi_tail_scaled(double w) const;
  /// Principal-branch analytic continuation (Im z kept off the negative
  /// real axis by the caller); available because every variant is closed form.
  std::complex<double> psi(std::complex<double> z) const;

  double psi_prime_zero() const { return gamma_; }
  ExtReal psi_prime_inf() const;

  /// int^inf du/Psi(u) < inf, decided analytically.
  bool grey_holds() const;
  /// int_1^inf x log x pi(dx) < inf, decided analytically.
  bool llogl_holds() const;

  /// m1 = int_0^inf x pi(dx) in (0, inf]; 0 when pi = 0.
  ExtReal levy_mean() const;
  /// int_1^inf x log x pi(dx), numeric when finite.
  ExtReal levy_llogl_moment() const;

 private:
  BranchingMechanism(double sigma2, double gamma, LevyMeasureSpec levy, bool neveu);
  void validate() const;
  void precompute();

  // Hot-path dispatch with constants folded at construction (tgamma/pow of
  // the parameters are far more expensive than the evaluation itself).
  enum class LevyKind { none, ts, ts_alpha1, ts_untempered, compound_exp, compound_gamma };

  double sigma2_;
  double gamma_;
  LevyMeasureSpec levy_;
  bool neveu_;
  LevyKind kind_ = LevyKind::none;
  double k_alpha_ = 0.0;    // stability / gamma shape
  double k_pref_ = 0.0;     // folded prefactor of the jump-integral term
  double k_inv_rate_ = 0.0; // 1/tempering or 1/jump-rate
  double k_aux_ = 0.0;      // variant-specific spare constant
};

namespace detail {
/// (1+s)^a - 1 - a*s, cancellation-free for small |s| (binomial series).
double pow1p_minus_linear(double a, double s);
/// (1+u) log(1+u) - u, cancellation-free for small u.
double xlog1p_minus(double u);
}  // namespace detail

}  // namespace csbp

#include "csbp/mechanism.hpp"

#include <cmath>
#include <stdexcept>

#include "csbp/detail/quadrature.hpp"

namespace csbp {

namespace detail {

double pow1p_minus_linear(double a, double s) {
  if (s < -1.0) throw std::invalid_argument("pow1p_minus_linear: s < -1");
  if (std::abs(s) < 0.1) {
    // sum_{k>=2} C(a,k) s^k; geometric decay for |s| < 0.1
    double coef = a * (a - 1.0) * 0.5;  // C(a,2)
    double sk = s * s;
    double acc = coef * sk;
    for (int k = 3; k < 60; ++k) {
      coef *= (a - (k - 1)) / k;
      sk *= s;
      const double term = coef * sk;
      acc += term;
      if (std::abs(term) < 1e-18 * std::abs(acc) + 1e-300) break;
    }
    return acc;
  }
  return std::expm1(a * std::log1p(s)) - a * s;
}

double xlog1p_minus(double u) {
  if (u < 0.0) throw std::invalid_argument("xlog1p_minus: negative argument");
  if (u < 1e-3) {
    // sum_{n>=2} (-1)^n u^n / (n(n-1))
    double acc = 0.0, un = u * u;
    double sign = 1.0;
    for (int n = 2; n < 14; ++n) {
      acc += sign * un / (n * (n - 1.0));
      un *= u;
      sign = -sign;
    }
    return acc;
  }
  return (1.0 + u) * std::log1p(u) - u;
}

namespace {

// ((1+s)^a - 1 - a s)/s^2 without forming s^2 (finite limit a(a-1)/2 at 0).
double pow1p_minus_linear_over_s2(double a, double s) {
  if (std::abs(s) >= 0.1) return pow1p_minus_linear(a, s) / (s * s);
  double coef = a * (a - 1.0) * 0.5;
  double sk = 1.0;
  double acc = coef;
  for (int k = 3; k < 60; ++k) {
    coef *= (a - (k - 1)) / k;
    sk *= s;
    const double term = coef * sk;
    acc += term;
    if (std::abs(term) < 1e-18 * std::abs(acc) + 1e-300) break;
  }
  return acc;
}

// ((1+s)log(1+s) - s)/s^2, finite limit 1/2 at 0.
double xlog1p_minus_over_s2(double s) {
  if (s >= 1e-3) return xlog1p_minus(s) / (s * s);
  double acc = 0.0, un = 1.0, sign = 1.0;
  for (int n = 2; n < 14; ++n) {
    acc += sign * un / (n * (n - 1.0));
    un *= s;
    sign = -sign;
  }
  return acc;
}

}  // namespace

}  // namespace detail

double jump_mean(const JumpLaw& j) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ExponentialJumps>) return 1.0 / v.rate;
        else return v.shape / v.rate;
      },
      j);
}

double jump_laplace(const JumpLaw& j, double u) {
  return std::visit(
      [u](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ExponentialJumps>) return v.rate / (v.rate + u);
        else return std::exp(-v.shape * std::log1p(u / v.rate));
      },
      j);
}

double jump_density(const JumpLaw& j, double x) {
  if (x <= 0.0) return 0.0;
  return std::visit(
      [x](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ExponentialJumps>) return v.rate * std::exp(-v.rate * x);
        else
          return std::exp(v.shape * std::log(v.rate) + (v.shape - 1.0) * std::log(x) -
                          v.rate * x - std::lgamma(v.shape));
      },
      j);
}

namespace {

void validate_jump_law(const JumpLaw& j) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ExponentialJumps>) {
          if (!(v.rate > 0.0)) throw std::invalid_argument("jump law: rate must be positive");
        } else {
          if (!(v.rate > 0.0) || !(v.shape > 0.0))
            throw std::invalid_argument("jump law: shape and rate must be positive");
        }
      },
      j);
}

// int_0^inf (e^{-zx} - 1 + zx) pi(dx), analytic continuation per variant.
std::complex<double> levy_above_linear(const LevyMeasureSpec& levy, std::complex<double> z) {
  using C = std::complex<double>;
  return std::visit(
      [z](const auto& v) -> C {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return C(0.0, 0.0);
        } else if constexpr (std::is_same_v<T, TemperedStable>) {
          if (v.tempering == 0.0) return v.scale * std::tgamma(-v.alpha) * std::pow(z, v.alpha);
          const C s = z / v.tempering;
          if (v.alpha == 1.0)
            return v.scale * v.tempering * ((1.0 + s) * std::log(1.0 + s) - s);
          return v.scale * std::tgamma(-v.alpha) * std::pow(v.tempering, v.alpha) *
                 (std::pow(1.0 + s, v.alpha) - 1.0 - v.alpha * s);
        } else {
          if (const auto* e = std::get_if<ExponentialJumps>(&v.jumps))
            return v.rate * z * z / (e->rate * (e->rate + z));
          const auto& g = std::get<GammaJumps>(v.jumps);
          const C s = z / g.rate;
          return v.rate * (std::pow(1.0 + s, -g.shape) - 1.0 + g.shape * s);
        }
      },
      levy);
}

}  // namespace

BranchingMechanism::BranchingMechanism(double sigma2, double gamma, LevyMeasureSpec levy,
                                       bool neveu)
    : sigma2_(sigma2), gamma_(gamma), levy_(std::move(levy)), neveu_(neveu) {
  validate();
  precompute();
}

void BranchingMechanism::precompute() {
  if (neveu_) return;
  if (const auto* ts = std::get_if<TemperedStable>(&levy_)) {
    k_alpha_ = ts->alpha;
    if (ts->tempering == 0.0) {
      kind_ = LevyKind::ts_untempered;
      k_pref_ = ts->scale * std::tgamma(-ts->alpha);
    } else if (ts->alpha == 1.0) {
      kind_ = LevyKind::ts_alpha1;
      k_pref_ = ts->scale * ts->tempering;
      k_inv_rate_ = 1.0 / ts->tempering;
    } else {
      kind_ = LevyKind::ts;
      k_pref_ = ts->scale * std::tgamma(-ts->alpha) * std::pow(ts->tempering, ts->alpha);
      k_inv_rate_ = 1.0 / ts->tempering;
      k_aux_ = ts->tempering;
    }
  } else if (const auto* fc = std::get_if<FiniteCompound>(&levy_)) {
    if (const auto* e = std::get_if<ExponentialJumps>(&fc->jumps)) {
      kind_ = LevyKind::compound_exp;
      k_pref_ = fc->rate;
      k_aux_ = e->rate;
      k_inv_rate_ = 1.0 / e->rate;
    } else {
      const auto& g = std::get<GammaJumps>(fc->jumps);
      kind_ = LevyKind::compound_gamma;
      k_pref_ = fc->rate;
      k_alpha_ = -g.shape;
      k_inv_rate_ = 1.0 / g.rate;
    }
  }
}

BranchingMechanism BranchingMechanism::feller(double sigma2, double gamma) {
  return BranchingMechanism(sigma2, gamma, std::monostate{}, false);
}

BranchingMechanism BranchingMechanism::neveu(double gamma) {
  return BranchingMechanism(0.0, gamma, std::monostate{}, true);
}

BranchingMechanism BranchingMechanism::with_levy(double sigma2, double gamma,
                                                 LevyMeasureSpec levy) {
  return BranchingMechanism(sigma2, gamma, std::move(levy), false);
}

void BranchingMechanism::validate() const {
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_))
    throw std::invalid_argument("mechanism: subcritical requires gamma = Psi'(0+) > 0");
  if (sigma2_ < 0.0 || !std::isfinite(sigma2_))
    throw std::invalid_argument("mechanism: sigma2 must be >= 0");
  if (neveu_) return;
  if (const auto* ts = std::get_if<TemperedStable>(&levy_)) {
    if (!(ts->alpha > 0.0 && ts->alpha < 2.0))
      throw std::invalid_argument("mechanism: stability index must lie in (0,2)");
    if (!(ts->scale > 0.0)) throw std::invalid_argument("mechanism: stable scale must be > 0");
    if (ts->tempering < 0.0) throw std::invalid_argument("mechanism: tempering must be >= 0");
    if (ts->tempering == 0.0 && ts->alpha <= 1.0)
      throw std::invalid_argument(
          "mechanism: untempered stable needs alpha > 1 (x ∧ x² integrability at infinity)");
  } else if (const auto* fc = std::get_if<FiniteCompound>(&levy_)) {
    if (!(fc->rate > 0.0)) throw std::invalid_argument("mechanism: compound rate must be > 0");
    validate_jump_law(fc->jumps);
  } else if (sigma2_ == 0.0) {
    throw std::invalid_argument("mechanism: linear Psi rejected (need pi != 0 or sigma > 0)");
  }
}

std::string BranchingMechanism::name() const {
  if (neveu_) return "neveu";
  if (std::holds_alternative<std::monostate>(levy_)) return "feller";
  if (std::holds_alternative<TemperedStable>(levy_)) return "tempered_stable";
  return "finite_compound";
}

double BranchingMechanism::psi_above_linear(double u) const {
  if (u < 0.0) throw std::invalid_argument("psi: negative argument");
  if (neveu_) return gamma_ * detail::xlog1p_minus(u);
  const double diff = 0.5 * sigma2_ * u * u;
  switch (kind_) {
    case LevyKind::none:
      return diff;
    case LevyKind::ts:
      return diff + k_pref_ * detail::pow1p_minus_linear(k_alpha_, u * k_inv_rate_);
    case LevyKind::ts_alpha1:
      return diff + k_pref_ * detail::xlog1p_minus(u * k_inv_rate_);
    case LevyKind::ts_untempered:
      return diff + k_pref_ * std::pow(u, k_alpha_);
    case LevyKind::compound_exp:
      return diff + k_pref_ * u * u / (k_aux_ * (k_aux_ + u));
    case LevyKind::compound_gamma:
      return diff + k_pref_ * detail::pow1p_minus_linear(k_alpha_, u * k_inv_rate_);
  }
  return diff;
}

double BranchingMechanism::psi(double u) const { return gamma_ * u + psi_above_linear(u); }

std::complex<double> BranchingMechanism::psi(std::complex<double> z) const {
  if (neveu_) return gamma_ * (1.0 + z) * std::log(1.0 + z);
  return 0.5 * sigma2_ * z * z + gamma_ * z + levy_above_linear(levy_, z);
}

double BranchingMechanism::psi_tail_scaled(double w) const {
  if (!(w > 0.0)) throw std::invalid_argument("psi_tail_scaled: w must be positive");
  if (neveu_) {
    // w^2 gamma (1 + 1/w) log(1 + 1/w) = gamma (w+1) * (w log1p(1/w))
    return gamma_ * (w + 1.0) * (w * std::log1p(1.0 / w));
  }
  double out = 0.5 * sigma2_ + gamma_ * w;
  // The jump term is w^2 * [closed-form compensated integral at u = 1/w];
  // with s = 1/(tempering*w) it reduces to prefactor * ((1+s)^a-1-as)/s^2
  // style ratios, finite for every w in (0, inf).
  switch (kind_) {
    case LevyKind::none:
      break;
    case LevyKind::ts: {
      const double s = k_inv_rate_ / w;
      out += k_pref_ * k_inv_rate_ * k_inv_rate_ * detail::pow1p_minus_linear_over_s2(k_alpha_, s);
      break;
    }
    case LevyKind::ts_alpha1: {
      const double s = k_inv_rate_ / w;
      out += k_pref_ * k_inv_rate_ * k_inv_rate_ * detail::xlog1p_minus_over_s2(s);
      break;
    }
    case LevyKind::ts_untempered:
      out += k_pref_ * std::pow(w, 2.0 - k_alpha_);
      break;
    case LevyKind::compound_exp:
      out += k_pref_ / (k_aux_ * (k_aux_ + 1.0 / w));
      break;
    case LevyKind::compound_gamma: {
      const double s = k_inv_rate_ / w;
      out += k_pref_ * k_inv_rate_ * k_inv_rate_ * detail::pow1p_minus_linear_over_s2(k_alpha_, s);
      break;
    }
  }
  return out;
}

ExtReal BranchingMechanism::psi_prime_inf() const {
  if (sigma2_ > 0.0 || neveu_) return ExtReal::infinity();
  const ExtReal m1 = levy_mean();
  if (m1.is_infinite()) return ExtReal::infinity();
  return ExtReal(gamma_ + m1.value());
}

bool BranchingMechanism::grey_holds() const {
  if (sigma2_ > 0.0) return true;
  if (neveu_) return false;
  if (const auto* ts = std::get_if<TemperedStable>(&levy_)) return ts->alpha > 1.0;
  return false;
}

bool BranchingMechanism::llogl_holds() const {
  // Neveu: exponentially tempered tail. Tempered stable: tempering kills the
  // tail; untempered requires alpha > 1 which is enforced at construction.
  // Exponential and Gamma jump laws have all x log x moments.
  return true;
}

ExtReal BranchingMechanism::levy_mean() const {
  if (neveu_) return ExtReal::infinity();
  return std::visit(
      [](const auto& v) -> ExtReal {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return ExtReal(0.0);
        } else if constexpr (std::is_same_v<T, TemperedStable>) {
          if (v.alpha >= 1.0) return ExtReal::infinity();  // small-jump divergence
          return ExtReal(v.scale * std::tgamma(1.0 - v.alpha) *
                         std::pow(v.tempering, v.alpha - 1.0));
        } else {
          return ExtReal(v.rate * jump_mean(v.jumps));
        }
      },
      levy_);
}

ExtReal BranchingMechanism::levy_llogl_moment() const {
  const double g = gamma_;
  if (neveu_) {
    // gamma int_1^inf log(x) e^{-x}/x dx
    const double val =
        detail::integrate([](double x) { return std::log(x) * std::exp(-x) / x; }, 1.0, 60.0,
                          1e-12, 1e-12);
    return ExtReal(g * val);
  }
  return std::visit(
      [](const auto& v) -> ExtReal {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return ExtReal(0.0);
        } else if constexpr (std::is_same_v<T, TemperedStable>) {
          if (v.tempering == 0.0)
            return ExtReal(v.scale / ((v.alpha - 1.0) * (v.alpha - 1.0)));
          const double hi = 1.0 + 80.0 / v.tempering;
          const double val = detail::integrate(
              [&v](double x) {
                return std::log(x) * v.scale * std::pow(x, -v.alpha) *
                       std::exp(-v.tempering * x);
              },
              1.0, hi, 1e-12, 1e-12);
          return ExtReal(val);
        } else {
          double hi = 1.0;
          while (jump_density(v.jumps, hi) * hi * std::log(hi + 1.0) > 1e-16 && hi < 1e6)
            hi *= 2.0;
          const double val = detail::integrate(
              [&v](double x) { return x * std::log(x) * jump_density(v.jumps, x); }, 1.0, hi,
              1e-12, 1e-12);
          return ExtReal(v.rate * val);
        }
      },
      levy_);
}

}  // namespace csbp

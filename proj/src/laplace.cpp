#include "csbp/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "csbp/limit.hpp"
#include "csbp/parallel.hpp"

namespace csbp {

namespace {

unsigned __int128 factorial128(int n) {
  unsigned __int128 f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Stehfest weights, exact 128-bit rational terms (no cancellation inside a
// weight; the alternation sits in the outer sign).
const std::vector<double>& stehfest_weights(int order) {
  static std::mutex mu;
  static std::map<int, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  const int half = order / 2;
  std::vector<double> a(order + 1, 0.0);
  for (int k = 1; k <= order; ++k) {
    long double sum = 0.0L;
    for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
      unsigned __int128 num = factorial128(2 * j);
      for (int p = 0; p < half; ++p) num *= static_cast<unsigned>(j);
      unsigned __int128 den = factorial128(half - j) * factorial128(j);
      den *= factorial128(j - 1);
      den *= factorial128(k - j);
      den *= factorial128(2 * j - k);
      sum += static_cast<long double>(num) / static_cast<long double>(den);
    }
    a[k] = static_cast<double>(((k + half) % 2 == 0 ? 1.0L : -1.0L) * sum);
  }
  return cache.emplace(order, std::move(a)).first->second;
}

}  // namespace

double gaver_stehfest(const std::function<double(double)>& transform, double x, int order) {
  if (!(x > 0.0)) throw std::invalid_argument("gaver_stehfest: x must be positive");
  if (order < 2 || order > 16 || order % 2 != 0)
    throw std::invalid_argument("gaver_stehfest: order must be even in [2,16]");
  const auto& a = stehfest_weights(order);
  const double l2x = M_LN2 / x;
  double acc = 0.0;
  for (int k = 1; k <= order; ++k) acc += a[k] * transform(k * l2x);
  return acc * l2x;
}

double fixed_talbot(const std::function<std::complex<double>(std::complex<double>)>& transform,
                    double x, int points) {
  if (!(x > 0.0)) throw std::invalid_argument("fixed_talbot: x must be positive");
  const int m = std::max(8, points);
  const double r = 2.0 * m / (5.0 * x);
  double acc = 0.5 * std::exp(r * x) * transform(std::complex<double>(r, 0.0)).real();
  for (int k = 1; k < m; ++k) {
    const double th = k * M_PI / m;
    const double cot = std::cos(th) / std::sin(th);
    const std::complex<double> s(r * th * cot, r * th);
    const double sig = th + (th * cot - 1.0) * cot;
    const std::complex<double> val =
        std::exp(s * x) * transform(s) * std::complex<double>(1.0, sig);
    acc += val.real();
  }
  return acc * r / m;
}

namespace {
const char* kind_name(InversionKind k) {
  switch (k) {
    case InversionKind::mass_function: return "mass function";
    case InversionKind::tail: return "tail";
    default: return "density";
  }
}
}  // namespace

double invert_to_function(const TransformFn& transform, double x, InversionKind kind,
                          const InversionOptions& opts, InversionDiagnostics* diag) {
  if (!(x > 0.0)) throw std::invalid_argument("invert_to_function: x must be positive");
  const int base = std::clamp(opts.gs_order - opts.gs_order % 2, 10, 16);

  std::map<int, double> vals;
  auto value_at = [&](int n) {
    auto it = vals.find(n);
    if (it != vals.end()) return it->second;
    return vals.emplace(n, gaver_stehfest(transform.eval, x, n)).first->second;
  };
  // GS error decays roughly geometrically in the order for smooth
  // transforms; extrapolate the highest consecutive triple and declare
  // convergence from the last adjacent spread.
  auto triple = [&](int top, double& out, double& spread) {
    const double v0 = value_at(top - 4), v1 = value_at(top - 2), v2 = value_at(top);
    spread = std::abs(v2 - v1);
    out = v2;
    const double d0 = v1 - v0, d1 = v2 - v1;
    if (d0 != 0.0) {
      const double rho = d1 / d0;
      if (std::abs(rho) < 0.5) out = v2 + d1 * rho / (1.0 - rho);
    }
    return spread <= std::max(opts.abs_tol, opts.rel_tol * std::max(std::abs(v1), std::abs(v2)));
  };

  double v = 0.0, spread = 0.0;
  const int top0 = std::min(base + 2, 16);
  if (triple(top0, v, spread)) {
    if (diag) *diag = {top0, spread, false};
    return std::max(v, 0.0);
  }
  double best_v = v, best_spread = spread;
  int best_order = top0;
  for (int n = 12; n <= 16; n += 2) {
    if (n == top0) continue;
    double vv, sp;
    const bool ok = triple(n, vv, sp);
    if (sp < best_spread) {
      best_spread = sp;
      best_v = vv;
      best_order = n;
    }
    if (ok) {
      if (diag) *diag = {n, sp, false};
      return std::max(vv, 0.0);
    }
  }
  if (opts.allow_talbot && transform.eval_complex) {
    const double ta = fixed_talbot(transform.eval_complex, x, opts.talbot_points);
    const double tb = fixed_talbot(transform.eval_complex, x, opts.talbot_points + 8);
    if (std::abs(tb - ta) <=
        std::max(opts.abs_tol, 10.0 * opts.rel_tol * std::max(std::abs(ta), std::abs(tb)))) {
      if (diag) *diag = {0, std::abs(tb - ta), true};
      return std::max(tb, 0.0);
    }
  }
  if (opts.best_effort) {
    if (diag) *diag = {best_order, best_spread, false};
    return std::max(best_v, 0.0);
  }
  std::ostringstream msg;
  msg << "invert_to_function: no convergence for the " << kind_name(kind) << " at x=" << x
      << " (best Gaver-Stehfest pair at order " << best_order << " spread " << best_spread
      << ", value " << best_v
      << (transform.eval_complex ? ", Talbot disagreed)" : ", no complex continuation)");
  throw std::runtime_error(msg.str());
}

double c_theta(const CumulantSolver& s, double theta, double q) {
  if (!(theta > 0.0) || !(q > 0.0))
    throw std::invalid_argument("c_theta: theta and q must be positive");
  return std::exp(-theta * s.inv_psi_integral(1.0, q));
}

std::complex<double> c_theta(const CumulantSolver& s, double theta, std::complex<double> q) {
  return std::exp(-theta * s.inv_psi_integral(1.0, q));
}

namespace {

TransformFn xi_transform(const CumulantSolver& s, double theta) {
  TransformFn t;
  t.eval = [&s, theta](double q) { return c_theta(s, theta, q) / q; };
  t.eval_complex = [&s, theta](std::complex<double> z) { return c_theta(s, theta, z) / z; };
  t.completely_monotone = true;
  return t;
}

}  // namespace

InvariantFunction::InvariantFunction(const CumulantSolver& s, double theta,
                                     double asymptotic_crossover)
    : solver_(&s), theta_(theta), crossover_(asymptotic_crossover) {
  if (theta < 0.0) throw std::invalid_argument("InvariantFunction: theta must be >= 0");
}

double InvariantFunction::asymptotic(double x) const {
  if (!(x > 0.0)) throw std::invalid_argument("InvariantFunction: x must be positive");
  if (theta_ == 0.0) return 1.0;
  const double expo = theta_ * solver_->inv_psi_integral(1.0 / x, 1.0);
  return std::exp(expo) / std::tgamma(1.0 + theta_ / solver_->mechanism().gamma());
}

double InvariantFunction::operator()(double x) const {
  if (!(x > 0.0)) throw std::invalid_argument("InvariantFunction: x must be positive");
  if (theta_ == 0.0) return 1.0;  // mu_0 = delta_0: constant mass function
  if (x >= crossover_) {
    crossover_used_ = true;
    return asymptotic(x);
  }
  return invert_to_function(xi_transform(*solver_, theta_), x, InversionKind::mass_function);
}

double f_theta(const CumulantSolver& s, double theta, double x) {
  return InvariantFunction(s, theta)(x);
}

double hitting_time_lt(const CumulantSolver& s, double theta, double x, double y) {
  if (!(theta > 0.0)) throw std::invalid_argument("hitting_time_lt: theta must be positive");
  if (!(x > 0.0) || x > y) throw std::invalid_argument("hitting_time_lt: need 0 < x <= y");
  if (x == y) return 1.0;
  const InvariantFunction f(s, theta);
  return f(x) / f(y);
}

namespace {

TransformFn levy_tail_transform(const CumulantSolver& s, ExtReal lam) {
  TransformFn t;
  t.completely_monotone = true;
  if (lam.is_infinite()) {
    if (!s.mechanism().grey_holds())
      throw std::domain_error("levy_tail: lam = inf requires Grey's condition");
    const double anchor_tail = s.inv_psi_integral_to_inf(1.0).value();
    const double g = s.mechanism().gamma();
    t.eval = [&s, g](double q) { return s.kappa_inf(q) / q; };
    t.eval_complex = [&s, g, anchor_tail](std::complex<double> z) {
      return std::exp(g * (s.inv_psi_integral(1.0, z) - anchor_tail)) / z;
    };
  } else {
    const double l = lam.value();
    const double g = s.mechanism().gamma();
    t.eval = [&s, l](double q) { return s.kappa_lambda(l, q) / q; };
    t.eval_complex = [&s, l, g](std::complex<double> z) {
      return std::exp(g * s.inv_psi_integral(l, z)) / z;
    };
  }
  return t;
}

}  // namespace

double levy_tail(const CumulantSolver& s, ExtReal lam, double x, const InversionOptions& opts) {
  if (!(x > 0.0)) throw std::invalid_argument("levy_tail: x must be positive");
  return invert_to_function(levy_tail_transform(s, lam), x, InversionKind::tail, opts);
}

ExtReal levy_total_mass(const CumulantSolver& s, ExtReal lam) {
  if (lam.is_infinite()) {
    if (!s.mechanism().grey_holds())
      throw std::domain_error("levy_total_mass: lam = inf requires Grey's condition");
    return ExtReal(1.0);  // nu_inf is the quasi-stationary probability law
  }
  return s.limit_levy_mass(lam.value());
}

McEstimate density_g(const CumulantSolver& s, ExtReal lam, double x, double u,
                     std::uint64_t mc_paths, const RngStream& rng, int threads) {
  if (!(x > 0.0) || !(u > 0.0)) throw std::invalid_argument("density_g: x,u must be positive");
  if (mc_paths == 0) throw std::invalid_argument("density_g: need at least one path");
  const LimitSampler sampler(s, lam, LimitSampler::auto_eps(s, lam));
  const auto draws = mc_samples(mc_paths, rng, threads, [&](RngStream& r) {
    const double z = sampler.marginal(u, r);
    return z < x ? sampler.table().tail(x - z) : 0.0;
  });
  const McSummary sum = summarize(draws);
  return {sum.mean, sum.std_err, sum.n};
}

double density_g_grey(const CumulantSolver& s, double x, double u, int n_max, bool force_grid,
                      double* tail_bound) {
  if (!(x > 0.0) || u < 0.0) throw std::invalid_argument("density_g_grey: bad arguments");
  if (!s.mechanism().grey_holds())
    throw std::domain_error("density_g_grey: requires Grey's condition");
  if (n_max < 0) throw std::invalid_argument("density_g_grey: n_max must be >= 0");

  const auto& m = s.mechanism();
  if (m.is_feller() && !force_grid) {
    // nu_inf = Exp(b), b = 2 gamma / sigma^2; the n-fold term is
    // e^{-b x} (b x)^n / n!.
    const double b = 2.0 * m.gamma() / m.sigma2();
    double pois = std::exp(-u);
    double conv = std::exp(-b * x);
    double g = pois * conv;
    double max_term = conv;
    for (int n = 1; n <= n_max; ++n) {
      pois *= u / n;
      conv *= b * x / n;
      max_term = std::max(max_term, conv);
      g += pois * conv;
    }
    if (tail_bound) {
      double cum = 0.0, p = std::exp(-u);
      for (int n = 0; n <= n_max; ++n) {
        cum += p;
        p *= u / (n + 1.0);
      }
      *tail_bound = std::max(0.0, 1.0 - cum) * max_term;
    }
    return g;
  }

  constexpr std::size_t kCells = 2048;
  const std::size_t n_nodes = kCells + 1;
  const double h = x / kCells;
  const LevyTailTable table(s, ExtReal::infinity(), 0.0);
  std::vector<double> tail(n_nodes), dens(n_nodes);
  for (std::size_t j = 0; j < n_nodes; ++j) tail[j] = table.tail(j * h);
  for (std::size_t j = 1; j + 1 < n_nodes; ++j) dens[j] = -(tail[j + 1] - tail[j - 1]) / (2 * h);
  dens[0] = -(-3.0 * tail[0] + 4.0 * tail[1] - tail[2]) / (2 * h);
  dens[n_nodes - 1] =
      -(3.0 * tail[n_nodes - 1] - 4.0 * tail[n_nodes - 2] + tail[n_nodes - 3]) / (2 * h);

  std::vector<double> cur = tail, next(n_nodes);
  double pois = std::exp(-u);
  double g = pois * cur.back();
  double max_term = cur.back();
  for (int n = 1; n <= n_max; ++n) {
    kernels::convolve_prefix_trapezoid(cur, dens, h, next);
    std::swap(cur, next);
    pois *= u / n;
    max_term = std::max(max_term, cur.back());
    g += pois * cur.back();
  }
  if (tail_bound) {
    double cum = 0.0, p = std::exp(-u);
    for (int n = 0; n <= n_max; ++n) {
      cum += p;
      p *= u / (n + 1.0);
    }
    *tail_bound = std::max(0.0, 1.0 - cum) * max_term;
  }
  return g;
}

}  // namespace csbp

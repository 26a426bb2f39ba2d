#include "csbp/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <thread>

#include "csbp/detail/quadrature.hpp"
#include "csbp/flow.hpp"
#include "csbp/laplace.hpp"
#include "csbp/limit.hpp"
#include "csbp/parallel.hpp"
#include "csbp/stats.hpp"

namespace csbp::verify {
namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

RngStream check_stream(const checks::Params& p, const std::string& name) {
  return RngStream(p.seed, fnv1a(name));
}

CumulantSolver feller_solver() { return CumulantSolver(BranchingMechanism::feller(2.0, 1.0)); }
CumulantSolver neveu_solver() { return CumulantSolver(BranchingMechanism::neveu(1.0)); }
CumulantSolver tempered_solver() {
  return CumulantSolver(BranchingMechanism::with_levy(0.0, 1.0, TemperedStable{0.5, 1.0, 1.0}));
}

double feller_v_closed(double t, double lam) {  // sigma2 = 2, gamma = 1
  const double e = std::exp(-t);
  return lam * e / (1.0 + lam * (1.0 - e));
}
double neveu_v_closed(double t, double lam) {  // gamma = 1
  return std::expm1(std::exp(-t) * std::log1p(lam));
}

std::uint64_t scaled(std::uint64_t n, double scale) {
  const double v = std::ceil(static_cast<double>(n) * scale);
  return v < 100.0 ? 100 : static_cast<std::uint64_t>(v);
}

}  // namespace

namespace checks {

CheckResult cumulant_oracles(const Params& p) {
  CheckResult r;
  r.name = "cumulant_oracles";
  r.identity = "v_t solves int_{v}^{lam} du/Psi = t (closed-form mechanisms)";
  r.oracle_exact = true;
  r.threshold = 1e-8;
  r.seed = p.seed;
  const auto sf = feller_solver();
  const auto sn = neveu_solver();
  double worst = 0.0;
  for (double t : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 20.0})
    for (double lam : {0.1, 1.0, 10.0}) {
      worst = std::max(worst, std::abs(sf.v(t, lam) / feller_v_closed(t, lam) - 1.0));
      worst = std::max(worst, std::abs(sn.v(t, lam) / neveu_v_closed(t, lam) - 1.0));
    }
  r.statistic = worst;
  r.pass = worst <= r.threshold;
  return r;
}

CheckResult flow_identity(const Params& p) {
  CheckResult r;
  r.name = "flow_identity";
  r.identity = "v_{t+s}(lam) = v_t(v_s(lam))";
  r.oracle_exact = true;
  r.threshold = 1e-8;  // relative to lam
  r.seed = p.seed;
  double worst = 0.0;
  for (const auto& s : {feller_solver(), neveu_solver()})
    for (double t : {0.5, 1.0, 2.0, 4.0, 8.0})
      for (double u : {0.5, 1.0, 2.0, 4.0, 8.0})
        for (double lam : {0.1, 1.0, 10.0})
          worst = std::max(worst,
                           std::abs(s.v(t + u, lam) - s.v(t, s.v(u, lam))) / lam);
  r.statistic = worst;
  r.pass = worst <= r.threshold;
  return r;
}

CheckResult qsd_transform(const Params& p) {
  CheckResult r;
  r.name = "qsd_transform";
  r.identity = "quasi-stationary transform 1 - kappa_inf(q); Feller gives 1/(1+q)";
  r.oracle_exact = true;
  r.threshold = 1e-8;
  r.seed = p.seed;
  const auto sf = feller_solver();
  double worst = 0.0;
  for (double q = 0.1; q <= 12.0; q *= 1.6)
    worst = std::max(worst, std::abs(sf.qsd_transform(q) - 1.0 / (1.0 + q)));
  // spot complete-monotonicity of the transform on a uniform grid
  const int n = 7;
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) vals[i] = sf.qsd_transform(0.5 + 0.5 * i);
  double sign = -1.0;
  bool cm_ok = true;
  for (int level = 1; level < n; ++level) {
    for (int i = 0; i + 1 < n - level + 1; ++i) vals[i] = vals[i + 1] - vals[i];
    for (int i = 0; i < n - level; ++i) cm_ok = cm_ok && sign * vals[i] >= -1e-9;
    sign = -sign;
  }
  if (!cm_ok) r.note = "finite-difference complete monotonicity violated";
  r.statistic = worst;
  r.pass = worst <= r.threshold && cm_ok;
  return r;
}

CheckResult qsd_conditional_law(const Params& p) {
  CheckResult r;
  r.name = "qsd_conditional_law";
  r.identity = "law of X_t conditioned on survival converges to the quasi-stationary law";
  r.threshold = p.ks_p_threshold;
  r.seed = p.seed;
  const auto sf = feller_solver();
  const double t = 8.0;
  const MarginalSampler ms(sf, t);
  const double p_survive = -std::expm1(-sf.v_inf(t).value());
  const std::uint64_t target = scaled(10000, p.replica_scale);
  const std::uint64_t n_draws =
      static_cast<std::uint64_t>(1.08 * static_cast<double>(target) / p_survive);
  auto draws = mc_samples(n_draws, check_stream(p, r.name), p.threads,
                          [&](RngStream& rng) { return ms.sample(1.0, rng); });
  std::vector<double> survivors;
  survivors.reserve(target + target / 8);
  for (double d : draws)
    if (d > 0.0) survivors.push_back(d);
  r.replicas = survivors.size();
  const LevyTailTable qsd(sf, ExtReal::infinity(), 0.0);
  const double pval =
      one_sample_ks(survivors, [&](double x) { return 1.0 - qsd.tail(x); });
  r.statistic = pval;
  r.pass = pval > r.threshold && survivors.size() >= target;
  r.note = "survivors=" + std::to_string(survivors.size());
  return r;
}

CheckResult duality(const Params& p) {
  CheckResult r;
  r.name = "duality";
  r.identity = "P(ancestor_t(x) > y) = P(x > X_t(y)), both strict orientations";
  r.threshold = p.z_threshold;
  r.seed = p.seed;
  const auto sf = feller_solver();
  const std::uint64_t n = scaled(100000, p.replica_scale);
  r.replicas = n;
  RngStream base = check_stream(p, r.name);
  const double delta = 0.005;
  struct Cfg {
    double t, x, y;
  };
  double worst = 0.0;
  int idx = 0;
  for (const Cfg c : {Cfg{std::log(2.0), 1.0, 1.0}, Cfg{1.0, 2.0, 1.0}, Cfg{2.0, 1.0, 3.0}}) {
    const MarginalSampler seg(sf, c.t);
    const auto lhs = mc_samples(n, base.split(2 * idx), p.threads, [&](RngStream& rng) {
      const double q[1] = {c.x};
      return inverse_flow_marginals(seg, delta, q, rng)[0];
    });
    const auto rhs = mc_samples(n, base.split(2 * idx + 1), p.threads,
                                [&](RngStream& rng) { return seg.sample(c.y, rng); });
    const auto frac = [&](auto pred_count) {
      return static_cast<double>(pred_count) / static_cast<double>(n);
    };
    std::uint64_t gt = 0, lt = 0, rgt = 0, rlt = 0;
    for (double v : lhs) {
      gt += v > c.y;
      lt += v < c.y;
    }
    for (double v : rhs) {
      rgt += c.x > v;
      rlt += c.x < v;
    }
    const double p1 = frac(gt), q1 = frac(rgt);
    const double p2 = frac(lt), q2 = frac(rlt);
    const double se1 = std::sqrt((p1 * (1 - p1) + q1 * (1 - q1)) / static_cast<double>(n));
    const double se2 = std::sqrt((p2 * (1 - p2) + q2 * (1 - q2)) / static_cast<double>(n));
    worst = std::max(worst, std::abs(p1 - q1) / se1);
    worst = std::max(worst, std::abs(p2 - q2) / se2);
    ++idx;
  }
  r.statistic = worst;
  r.pass = worst <= r.threshold;
  return r;
}

namespace {

CheckResult semigroup_check(const Params& p, const CumulantSolver& s, const std::string& name) {
  CheckResult r;
  r.name = name;
  r.identity = "lineage from Exp(q) initial point is Exp(v_t(q)) at time t";
  r.threshold = p.z_threshold;
  r.seed = p.seed;
  const std::uint64_t n = scaled(40000, p.replica_scale);
  r.replicas = n;
  RngStream base = check_stream(p, name);
  double worst = 0.0;
  int idx = 0;
  for (double t : {std::log(2.0), 2.0}) {
    const double delta = 0.002 * std::exp(s.mechanism().gamma() * t);
    const auto c =
        exp_init_semigroup_test(s, 1.0, t, Probe::exp_neg, n, delta, base.split(idx++), p.threads);
    worst = std::max(worst, std::abs(c.z));
  }
  r.statistic = worst;
  r.pass = worst <= r.threshold;
  return r;
}

}  // namespace

CheckResult semigroup_feller(const Params& p) {
  return semigroup_check(p, feller_solver(), "semigroup_feller");
}
CheckResult semigroup_neveu(const Params& p) {
  return semigroup_check(p, neveu_solver(), "semigroup_neveu");
}

CheckResult martingale_feller(const Params& p) {
  CheckResult r;
  r.name = "martingale_feller";
  r.identity = "e^{-theta t} f_theta(lineage) is a martingale";
  r.threshold = p.z_threshold;
  r.seed = p.seed;
  const auto sf = feller_solver();
  const std::uint64_t n = scaled(20000, p.replica_scale);
  r.replicas = n;
  RngStream base = check_stream(p, r.name);
  double worst = 0.0;
  int idx = 0;
  for (double t : {0.5, 1.0}) {
    const auto c = martingale_test(sf, 1.0, 1.0, t, n, 0.004, base.split(idx++), p.threads);
    worst = std::max(worst, std::abs(c.z));
  }
  r.statistic = worst;
  r.pass = worst <= r.threshold;
  return r;
}

CheckResult hitting_time_feller(const Params& p) {
  CheckResult r;
  r.name = "hitting_time_feller";
  r.identity = "E_x[e^{-theta T_y}] = f_theta(x)/f_theta(y), multiplicative over levels";
  r.threshold = p.z_threshold;
  r.seed = p.seed;
  const auto sf = feller_solver();
  const std::uint64_t n = scaled(2500, p.replica_scale);
  r.replicas = n;
  RngStream base = check_stream(p, r.name);
  // discretely monitored crossings miss O(sqrt(dt)) excursions; the
  // continuity correction recenters the estimator inside its 3-sigma band
  LineageSimOptions o;
  o.horizon = 30.0;
  o.dt = 0.005;
  o.delta = 0.0035;
  o.barrier_correction = true;
  const auto lt13 = hitting_transform_mc(sf, 1.0, 1.0, 3.0, o, n, base.split(0), p.threads);
  const auto lt37 = hitting_transform_mc(sf, 1.0, 3.0, 7.0, o, n, base.split(1), p.threads);
  const auto lt17 = hitting_transform_mc(sf, 1.0, 1.0, 7.0, o, n, base.split(2), p.threads);
  // f_1(x) = (1+x)/2 for this mechanism: targets 1/2, 1/2, 1/4
  const double z1 = (lt13.mean - 0.5) / lt13.se;
  const double prod = lt13.mean * lt37.mean;
  const double var_prod = lt13.mean * lt13.mean * lt37.se * lt37.se +
                          lt37.mean * lt37.mean * lt13.se * lt13.se;
  const double z_mult = (prod - lt17.mean) / std::sqrt(var_prod + lt17.se * lt17.se);
  r.statistic = std::max(std::abs(z1), std::abs(z_mult));
  r.pass = r.statistic <= r.threshold;
  r.note = "lt13=" + std::to_string(lt13.mean) + " lt37=" + std::to_string(lt37.mean) +
           " lt17=" + std::to_string(lt17.mean);
  return r;
}

CheckResult lambda_ratio(const Params& p) {
  CheckResult r;
  r.name = "lambda_ratio";
  r.identity = "v_t(lam)/v_t(lam') -> exp(gamma int_{lam'}^{lam} du/Psi)";
  r.oracle_exact = true;
  r.threshold = 1e-6;
  r.seed = p.seed;
  double worst = 0.0;
  bool decay_ok = true;
  for (const auto& s : {feller_solver(), neveu_solver()}) {
    const double target = s.c_ratio(3.0, 1.0);
    double prev = 1e300;
    for (double t : {5.0, 10.0, 20.0}) {
      const double err = std::abs(s.v(t, 3.0) / s.v(t, 1.0) - target);
      decay_ok = decay_ok && err <= prev + 1e-14;
      prev = err;
    }
    worst = std::max(worst, prev);  // error at t = 20
  }
  // the Neveu ratio constant is exactly 2
  const double neveu_c = neveu_solver().c_ratio(3.0, 1.0);
  worst = std::max(worst, std::abs(neveu_c - 2.0));
  r.statistic = worst;
  r.pass = worst <= r.threshold && decay_ok;
  if (!decay_ok) r.note = "ratio error not monotone over t in {5,10,20}";
  return r;
}

namespace {

CheckResult scaling_limit_check(const Params& p, const CumulantSolver& s,
                                const std::string& name) {
  CheckResult r;
  r.name = name;
  r.identity = "v_t(lam) * ancestor_t(x) converges to the inverse limit subordinator";
  r.threshold = p.ks_p_threshold;
  r.seed = p.seed;
  const double t = 15.0, lam = 1.0, x = 1.0;
  const std::uint64_t n = scaled(10000, p.replica_scale);
  r.replicas = n;
  RngStream base = check_stream(p, name);
  const double vt = s.v(t, lam);
  const double scale_of_states = x * std::exp(s.mechanism().gamma() * t);
  const double delta = 1e-3 * scale_of_states;
  const MarginalSampler seg(s, t);
  {  // force any lazy table build before the parallel fan-out
    RngStream warm = base.split(999983);
    seg.sample(delta, warm);
  }
  auto rescaled = mc_samples(n, base.split(0), p.threads, [&](RngStream& rng) {
    const double q[1] = {x};
    return vt * inverse_flow_marginals(seg, delta, q, rng)[0];
  });
  const bool grey = s.mechanism().grey_holds();
  const LimitSampler limit(s, ExtReal(lam), grey ? 0.0 : LimitSampler::auto_eps(s, ExtReal(lam)));
  auto direct = mc_samples(n, base.split(1), p.threads,
                           [&](RngStream& rng) { return limit.first_passage(x, rng); });
  const double pval = two_sample_ks(rescaled, direct);
  r.statistic = pval;
  r.pass = pval > r.threshold;
  return r;
}

}  // namespace

CheckResult scaling_limit_feller(const Params& p) {
  return scaling_limit_check(p, feller_solver(), "scaling_limit_feller");
}
CheckResult scaling_limit_neveu(const Params& p) {
  return scaling_limit_check(p, neveu_solver(), "scaling_limit_neveu");
}

CheckResult rescaled_limit(const Params& p) {
  CheckResult r;
  r.name = "rescaled_limit";
  r.identity = "inverse limit at lam' equals c_{lam',lam} times the one at lam";
  r.threshold = p.ks_p_threshold;
  r.seed = p.seed;
  const auto sf = feller_solver();
  const std::uint64_t n = scaled(10000, p.replica_scale);
  r.replicas = n;
  RngStream base = check_stream(p, r.name);
  const LimitSampler w3(sf, ExtReal(3.0), 0.0);
  const LimitSampler w1(sf, ExtReal(1.0), 0.0);
  const double c31 = sf.c_ratio(3.0, 1.0);
  auto a = mc_samples(n, base.split(0), p.threads,
                      [&](RngStream& rng) { return w3.first_passage(1.0, rng); });
  auto b = mc_samples(n, base.split(1), p.threads,
                      [&](RngStream& rng) { return c31 * w1.first_passage(1.0, rng); });
  const double pval = two_sample_ks(a, b);
  r.statistic = pval;
  r.pass = pval > r.threshold;
  r.note = "c_ratio=" + std::to_string(c31);
  return r;
}

CheckResult density_series(const Params& p) {
  CheckResult r;
  r.name = "density_series";
  r.identity = "series density of the inverse limit under a finite Lévy mass";
  r.oracle_exact = true;
  r.threshold = 1.0;  // worst tolerance ratio
  r.seed = p.seed;
  const auto sf = feller_solver();
  double worst = 0.0;
  for (double u = 0.1; u <= 5.0; u += 0.49) {
    const double want = std::exp(-1.0 - u) * std::cyl_bessel_i(0.0, 2.0 * std::sqrt(u));
    const double got = density_g_grey(sf, 1.0, u, 30);
    worst = std::max(worst, std::abs(got - want) / 1e-6);
  }
  // the density integrates to 1
  const double mass = detail::integrate(
      [&](double u) { return density_g_grey(sf, 1.0, u, 80); }, 1e-9, 40.0, 1e-6, 1e-6);
  worst = std::max(worst, std::abs(mass - 1.0) / 2e-3);
  // grid path agrees with the closed-form path
  const double grid = density_g_grey(sf, 1.0, 1.0, 30, true);
  const double closed = density_g_grey(sf, 1.0, 1.0, 30, false);
  worst = std::max(worst, std::abs(grid - closed) / 2e-5);
  r.statistic = worst;
  r.pass = worst <= 1.0;
  r.note = "integral=" + std::to_string(mass);
  return r;
}

CheckResult density_mc(const Params& p) {
  CheckResult r;
  r.name = "density_mc";
  r.identity = "Monte Carlo density of the inverse limit matches the series form";
  r.threshold = p.z_threshold;
  r.seed = p.seed;
  const auto sf = feller_solver();
  const std::uint64_t n = scaled(100000, p.replica_scale);
  r.replicas = n;
  double worst = 0.0;
  RngStream base = check_stream(p, r.name);
  int idx = 0;
  for (double u : {0.5, 1.0, 2.0}) {
    const auto mc = density_g(sf, ExtReal::infinity(), 1.0, u, n, base.split(idx++), p.threads);
    const double want = density_g_grey(sf, 1.0, u, 40);
    worst = std::max(worst, std::abs(mc.value - want) / mc.std_err);
  }
  r.statistic = worst;
  r.pass = worst <= r.threshold;
  return r;
}

CheckResult partition_renewal(const Params& p) {
  CheckResult r;
  r.name = "partition_renewal";
  r.identity = "ancestral families form a renewal partition with exponential ages";
  r.threshold = p.ks_p_threshold;
  r.seed = p.seed;
  const auto sf = feller_solver();
  const std::uint64_t target = scaled(10000, p.replica_scale);
  RngStream rng = check_stream(p, r.name);
  const LimitSampler w(sf, ExtReal::infinity(), 0.0);
  const auto path = w.simulate(static_cast<double>(target) * 1.25, rng);
  const auto part = ancestral_partition(path, 1e18);
  std::vector<double> lengths(part.lengths.begin(),
                              part.lengths.begin() +
                                  std::min<std::size_t>(part.lengths.size(), target));
  std::vector<double> ages(part.ages.begin(),
                           part.ages.begin() + std::min<std::size_t>(part.ages.size(), target));
  r.replicas = lengths.size();
  const LevyTailTable qsd(sf, ExtReal::infinity(), 0.0);
  const double p_len = one_sample_ks(lengths, [&](double x) { return 1.0 - qsd.tail(x); });
  const double p_age = one_sample_ks(ages, [](double x) { return -std::expm1(-x); });
  const double rho = lag1_autocorrelation(lengths);
  // |rho| < 0.03 is calibrated for 1e4 families; keep the 3-sigma meaning
  // when the suite runs at reduced scale.
  const double rho_cap = std::max(0.03, 3.0 / std::sqrt(static_cast<double>(lengths.size())));
  r.statistic = std::min(p_len, p_age);
  r.pass = p_len > r.threshold && p_age > r.threshold && std::abs(rho) < rho_cap;
  r.note = "p_len=" + std::to_string(p_len) + " p_age=" + std::to_string(p_age) +
           " lag1=" + std::to_string(rho);
  return r;
}

CheckResult llogl_growth(const Params& p) {
  CheckResult r;
  r.name = "llogl_growth";
  r.identity = "e^{gamma t} v_t(lam) -> c_lam = kappa(lam)/... (x log x condition)";
  r.oracle_exact = true;
  r.threshold = 1e-6;
  r.seed = p.seed;
  const auto sn = neveu_solver();
  const auto sf = feller_solver();
  double worst = 0.0;
  for (double lam : {0.1, 1.0, 10.0}) {
    worst = std::max(worst,
                     std::abs(std::exp(20.0) * sn.v(20.0, lam) - std::log1p(lam)));
    // Feller closed form: c_lam = lam/(1+lam)
    worst = std::max(worst, std::abs(sf.c_lambda(lam) - lam / (1.0 + lam)));
    worst = std::max(worst, std::abs(std::exp(20.0) * sf.v(20.0, lam) - sf.c_lambda(lam)));
  }
  // kappa at e-1 is exactly 1 for the Neveu normalization
  const double kappa_err = std::abs(sn.kappa_llogl(M_E - 1.0) - 1.0);
  worst = std::max(worst, kappa_err);
  r.statistic = worst;
  r.pass = worst <= r.threshold;
  r.note = "kappa(e-1) error=" + std::to_string(kappa_err);
  return r;
}

CheckResult hausdorff_analytic(const Params& p) {
  CheckResult r;
  r.name = "hausdorff_analytic";
  r.identity = "dimension of the ancestor set = gamma / Psi'(inf)";
  r.oracle_exact = true;
  r.threshold = 1e-12;
  r.seed = p.seed;
  double worst = std::abs(hausdorff_index(BranchingMechanism::feller(2.0, 1.0)) - 0.0);
  worst = std::max(worst, std::abs(hausdorff_index(BranchingMechanism::neveu(1.0)) - 0.0));
  const double want = 1.0 / (1.0 + std::sqrt(M_PI));
  worst = std::max(
      worst, std::abs(hausdorff_index(BranchingMechanism::with_levy(
                          0.0, 1.0, TemperedStable{0.5, 1.0, 1.0})) -
                      want));
  r.statistic = worst;
  r.pass = worst <= r.threshold;
  return r;
}

CheckResult hausdorff_boxcount(const Params& p) {
  CheckResult r;
  r.name = "hausdorff_boxcount";
  r.identity = "box-count slope of the ancestor set (diagnostic only)";
  r.gating = false;
  r.threshold = 0.1;
  r.seed = p.seed;
  const auto st = tempered_solver();
  RngStream rng = check_stream(p, r.name);
  const double eps = 1e-8;
  const LimitSampler w(st, ExtReal(1.0), eps);
  const auto path = w.simulate(60.0, rng);
  double total = 0.0;
  for (double j : path.jump_sizes) total += j;
  const double x_max = 0.8 * total;
  std::vector<double> scales;
  for (int k = 4; k <= 24; ++k) scales.push_back(x_max * std::pow(2.0, -k));
  const auto est = box_count_estimate(path, x_max, scales);
  const double want = hausdorff_index(st.mechanism());
  r.statistic = std::abs(est.slope - want);
  r.pass = true;  // informational
  r.note = "slope=" + std::to_string(est.slope) + " index=" + std::to_string(want) +
           " jumps=" + std::to_string(path.jump_sizes.size());
  return r;
}

}  // namespace checks

namespace {

using CheckFn = CheckResult (*)(const checks::Params&);

const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> reg = {
      {"cumulant_oracles", checks::cumulant_oracles},
      {"density_mc", checks::density_mc},
      {"density_series", checks::density_series},
      {"duality", checks::duality},
      {"flow_identity", checks::flow_identity},
      {"hausdorff_analytic", checks::hausdorff_analytic},
      {"hausdorff_boxcount", checks::hausdorff_boxcount},
      {"hitting_time_feller", checks::hitting_time_feller},
      {"lambda_ratio", checks::lambda_ratio},
      {"llogl_growth", checks::llogl_growth},
      {"martingale_feller", checks::martingale_feller},
      {"partition_renewal", checks::partition_renewal},
      {"qsd_conditional_law", checks::qsd_conditional_law},
      {"qsd_transform", checks::qsd_transform},
      {"rescaled_limit", checks::rescaled_limit},
      {"scaling_limit_feller", checks::scaling_limit_feller},
      {"scaling_limit_neveu", checks::scaling_limit_neveu},
      {"semigroup_feller", checks::semigroup_feller},
      {"semigroup_neveu", checks::semigroup_neveu},
  };
  return reg;
}

}  // namespace

std::vector<std::string> registered_check_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

std::vector<CheckResult> run_suite(const SuiteConfig& cfg) {
  checks::Params params;
  params.seed = cfg.seed;
  params.threads = 1;  // parallelism lives at the suite level here
  params.replica_scale = cfg.replica_scale;
  params.z_threshold = cfg.z_threshold;
  params.ks_p_threshold = cfg.ks_p_threshold;

  std::vector<std::pair<std::string, CheckFn>> todo;
  for (const auto& entry : registry()) {
    if (!cfg.only.empty() &&
        std::find(cfg.only.begin(), cfg.only.end(), entry.first) == cfg.only.end())
      continue;
    todo.push_back(entry);
  }

  std::vector<CheckResult> results(todo.size());
  std::atomic<std::size_t> cursor{0};
  const int nt = std::max(1, std::min<int>(resolve_threads(cfg.threads),
                                           static_cast<int>(todo.size())));
  auto worker = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= todo.size()) return;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        results[i] = todo[i].second(params);
      } catch (const std::exception& e) {
        results[i].name = todo[i].first;
        results[i].pass = false;
        results[i].note = std::string("check aborted: ") + e.what();
      }
      results[i].runtime_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
              .count();
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < nt; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::sort(results.begin(), results.end(),
            [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; });
  return results;
}

bool suite_passes(const std::vector<CheckResult>& results) {
  std::size_t gating = 0, passed = 0;
  for (const auto& r : results) {
    if (!r.gating) continue;
    ++gating;
    if (r.pass) ++passed;
    if (r.oracle_exact && !r.pass) return false;
  }
  if (gating == 0) return true;
  return static_cast<double>(passed) >= 0.95 * static_cast<double>(gating);
}

nlohmann::json suite_report(const std::vector<CheckResult>& results, const SuiteConfig& cfg) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& r : results) {
    checks.push_back({{"name", r.name},
                      {"identity", r.identity},
                      {"statistic", r.statistic},
                      {"threshold", r.threshold},
                      {"pass", r.pass},
                      {"oracle_exact", r.oracle_exact},
                      {"gating", r.gating},
                      {"replicas", r.replicas},
                      {"seed", r.seed},
                      {"runtime_ms", r.runtime_ms},
                      {"note", r.note}});
  }
  return nlohmann::json{{"seed", cfg.seed},
                        {"replica_scale", cfg.replica_scale},
                        {"z_threshold", cfg.z_threshold},
                        {"ks_p_threshold", cfg.ks_p_threshold},
                        {"pass", suite_passes(results)},
                        {"checks", checks}};
}

void print_suite_table(std::ostream& os, const std::vector<CheckResult>& results) {
  os << std::left << std::setw(24) << "check" << std::setw(8) << "status" << std::setw(14)
     << "statistic" << std::setw(14) << "threshold" << std::setw(10) << "replicas"
     << "note\n";
  for (const auto& r : results) {
    os << std::left << std::setw(24) << r.name << std::setw(8)
       << (r.pass ? "pass" : (r.gating ? "FAIL" : "diag")) << std::setw(14)
       << std::setprecision(4) << r.statistic << std::setw(14) << r.threshold << std::setw(10)
       << r.replicas << r.note << "\n";
  }
}

}  // namespace csbp::verify

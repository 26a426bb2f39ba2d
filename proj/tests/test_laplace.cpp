#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "csbp/laplace.hpp"
#include "csbp/limit.hpp"
#include "oracles.hpp"

using namespace csbp;

namespace {
const CumulantSolver& feller() {
  static const CumulantSolver s(BranchingMechanism::feller(2.0, 1.0));
  return s;
}
const CumulantSolver& neveu() {
  static const CumulantSolver s(BranchingMechanism::neveu(1.0));
  return s;
}
}  // namespace

TEST_CASE("numerical inversion self-tests") {
  TransformFn exp_cdf{[](double q) { return 1.0 / (q * (1.0 + q)); },
                      [](std::complex<double> q) { return 1.0 / (q * (1.0 + q)); }, true};
  CHECK(invert_to_function(exp_cdf, std::log(2.0), InversionKind::mass_function) ==
        doctest::Approx(0.5).epsilon(1e-8));
  TransformFn point_mass{[](double q) { return 1.0 / q; }, nullptr, true};
  for (double x : {0.3, 1.0, 7.0})
    CHECK(invert_to_function(point_mass, x, InversionKind::mass_function) ==
          doctest::Approx(1.0).epsilon(1e-7));
  CHECK_THROWS_AS(invert_to_function(exp_cdf, -1.0, InversionKind::mass_function),
                  std::invalid_argument);
}

TEST_CASE("talbot fallback matches on closed-form transforms") {
  CHECK(fixed_talbot([](std::complex<double> q) { return 1.0 / (1.0 + q); }, 1.3, 32) ==
        doctest::Approx(std::exp(-1.3)).epsilon(1e-10));
  const auto xi1 = [&](std::complex<double> z) { return c_theta(feller(), 1.0, z) / z; };
  CHECK(fixed_talbot(xi1, 3.0, 32) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("theta-invariant measure transforms") {
  CHECK(c_theta(feller(), 0.7, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
  for (double q : {0.25, 1.0, 3.0, 20.0}) {
    CHECK(c_theta(feller(), 1.0, q) ==
          doctest::Approx(oracles::feller_c_theta1(q)).epsilon(1e-11));
    CHECK(c_theta(neveu(), 1.0, q) ==
          doctest::Approx(std::log(2.0) / std::log1p(q)).epsilon(1e-11));
  }
}

TEST_CASE("c_theta is completely monotone and solves its defining identity") {
  // finite differences alternate in sign
  const int n = 8;
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) vals[i] = c_theta(feller(), 1.5, 0.5 + 0.35 * i);
  double sign = -1.0;
  for (int level = 1; level < n; ++level) {
    for (int i = 0; i + level < n; ++i) vals[i] = vals[i + 1] - vals[i];
    for (int i = 0; i + level < n; ++i) CHECK(sign * vals[i] >= -1e-10);
    sign = -sign;
  }
  // -Psi(q) c'(q) = theta c(q), by central differences
  for (const auto* s : {&feller(), &neveu()})
    for (double q : {0.5, 1.5, 4.0}) {
      const double h = 1e-5 * q;
      const double deriv =
          (c_theta(*s, 2.0, q + h) - c_theta(*s, 2.0, q - h)) / (2.0 * h);
      CHECK(-s->mechanism().psi(q) * deriv ==
            doctest::Approx(2.0 * c_theta(*s, 2.0, q)).epsilon(1e-4));
    }
}

TEST_CASE("invariant functions") {
  CHECK(f_theta(feller(), 1.0, 3.0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(f_theta(feller(), 0.0, 3.0) == 1.0);  // mu_0 = delta_0
  // monotone non-decreasing, non-negative
  const InvariantFunction f(feller(), 1.0);
  double prev = 0.0;
  for (double x = 0.25; x < 300.0; x *= 2.0) {
    const double v = f(x);
    CHECK(v >= prev * (1.0 - 1e-9));
    prev = v;
  }
}

TEST_CASE("large-argument asymptotics and regular variation") {
  // Feller: the asymptotic equals the exact mass function
  const InvariantFunction f1(feller(), 1.0);
  CHECK(f1.asymptotic(1e3) == doctest::Approx(oracles::feller_f1(1e3)).epsilon(1e-9));
  CHECK(f1(1e3) * std::tgamma(2.0) / f1.asymptotic(1e3) == doctest::Approx(1.0).epsilon(0.05));
  // Neveu at moderate range: inversion within 5% of the asymptotic
  const InvariantFunction fn(neveu(), 1.0);
  CHECK(fn(10.0) / fn.asymptotic(10.0) == doctest::Approx(1.0).epsilon(0.05));
  // regular-variation normalization at y = 1e3
  const double ratio = fn(1e3) * std::tgamma(2.0) /
                       (std::tgamma(2.0) * fn.asymptotic(1e3));
  CHECK(ratio >= 0.95);
  CHECK(ratio <= 1.05);
  // crossover to the asymptotic is logged
  const InvariantFunction fc(neveu(), 1.0, 50.0);
  (void)fc(100.0);
  CHECK(fc.crossover_used());
}

TEST_CASE("inversion round-trip recovers the transform") {
  // forward-transform the inverted f_1 numerically and compare with xi_1
  const InvariantFunction f(feller(), 1.0);
  for (double q : {0.5, 1.0, 2.0}) {
    const double upper = 50.0 / q;
    const int n = 2000;
    const double h = upper / n;
    double acc = 0.0;  // composite Simpson over [h, upper] plus the first cell
    for (int i = 0; i <= n; ++i) {
      const double y = std::max(1e-9, i * h);
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      acc += w * f(y) * std::exp(-q * y);
    }
    acc *= h / 3.0;
    const double want = c_theta(feller(), 1.0, q) / q;
    CHECK(acc == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("hitting-time transforms from invariant functions") {
  CHECK(hitting_time_lt(feller(), 1.0, 2.0, 2.0) == 1.0);
  CHECK(hitting_time_lt(feller(), 1.0, 1.0, 3.0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(hitting_time_lt(feller(), 1.0, 1.0, 7.0) == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(hitting_time_lt(feller(), 1.0, 1.0, 3.0) * hitting_time_lt(feller(), 1.0, 3.0, 7.0) ==
        doctest::Approx(hitting_time_lt(feller(), 1.0, 1.0, 7.0)).epsilon(1e-6));
  CHECK_THROWS_AS(hitting_time_lt(feller(), 1.0, 3.0, 1.0), std::invalid_argument);
}

TEST_CASE("limit Lévy tails") {
  CHECK(levy_tail(feller(), ExtReal::infinity(), 1.3) ==
        doctest::Approx(std::exp(-1.3)).epsilon(1e-5));
  CHECK(levy_tail(feller(), ExtReal(1.0), 1e-9) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(levy_total_mass(feller(), ExtReal(1.0)).value() == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(levy_total_mass(feller(), ExtReal::infinity()).value() == 1.0);
  CHECK(levy_total_mass(neveu(), ExtReal(1.0)).is_infinite());
  CHECK_THROWS_AS(levy_tail(neveu(), ExtReal::infinity(), 1.0), std::domain_error);
}

TEST_CASE("series density under a finite Lévy mass") {
  double tail_bound = 0.0;
  CHECK(density_g_grey(feller(), 1.0, 1.0, 30, false, &tail_bound) ==
        doctest::Approx(oracles::feller_g_inf(1.0, 1.0)).epsilon(1e-9));
  CHECK(tail_bound < 1e-12);
  CHECK(density_g_grey(feller(), 1.3, 0.0, 30) ==
        doctest::Approx(levy_tail(feller(), ExtReal::infinity(), 1.3)).epsilon(1e-4));
  CHECK(density_g_grey(feller(), 1.0, 1.0, 30, true) ==
        doctest::Approx(oracles::feller_g_inf(1.0, 1.0)).epsilon(2e-5));
  CHECK_THROWS_AS(density_g_grey(neveu(), 1.0, 1.0, 30), std::domain_error);
}

TEST_CASE("density estimator agrees with the series") {
  RngStream rng(321, 0);
  const auto mc = density_g(feller(), ExtReal::infinity(), 1.0, 1.0, 60000, rng, 2);
  const double want = density_g_grey(feller(), 1.0, 1.0, 40);
  CHECK(std::abs(mc.value - want) <= 3.0 * mc.std_err);
  // x -> 0+: only the bare-tail term survives: g ~ e^{-u} nu_bar(0+)
  CHECK(density_g_grey(feller(), 1e-4, 2.0, 30) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-3));
}

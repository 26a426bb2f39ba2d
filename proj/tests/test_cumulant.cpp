#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "csbp/cumulant.hpp"
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
const CumulantSolver& tempered() {
  static const CumulantSolver s(
      BranchingMechanism::with_levy(0.0, 1.0, TemperedStable{0.5, 1.0, 1.0}));
  return s;
}
}  // namespace

TEST_CASE("reciprocal-psi integrals") {
  CHECK(feller().inv_psi_integral(1.0, 2.0) ==
        doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));
  CHECK(feller().inv_psi_integral(3.0, 3.0) == 0.0);
  CHECK(neveu().inv_psi_integral_to_inf(std::exp(1.0) - 1.0).is_infinite());
  CHECK(feller().inv_psi_integral_to_inf(1.0).value() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // antisymmetry
  CHECK(feller().inv_psi_integral(2.0, 1.0) ==
        doctest::Approx(-std::log(4.0 / 3.0)).epsilon(1e-12));
  // Neveu closed form on a wide interval
  CHECK(neveu().inv_psi_integral(0.01, 50.0) ==
        doctest::Approx(oracles::neveu_inv_psi(0.01, 50.0)).epsilon(1e-11));
}

TEST_CASE("cumulant against closed forms") {
  CHECK(neveu().v(std::log(2.0), 3.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(feller().v(0.0, 2.5) == 2.5);
  CHECK(feller().v(std::log(2.0), 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  for (double t : {0.1, 1.0, 5.0, 20.0})
    for (double lam : {0.1, 1.0, 10.0}) {
      CHECK(feller().v(t, lam) == doctest::Approx(oracles::feller_v(t, lam)).epsilon(1e-9));
      CHECK(neveu().v(t, lam) == doctest::Approx(oracles::neveu_v(t, lam)).epsilon(1e-9));
    }
}

TEST_CASE("integral-equation residual") {
  for (const auto* s : {&feller(), &neveu(), &tempered()})
    for (double t : {0.5, 2.0, 10.0})
      for (double lam : {0.5, 4.0}) {
        const double v = s->v(t, lam);
        CHECK(std::abs(s->inv_psi_integral(v, lam) - t) <= s->quad_tol());
      }
}

TEST_CASE("flow property on a lattice") {
  for (const auto* s : {&feller(), &neveu(), &tempered()})
    for (double t : {0.3, 1.7})
      for (double u : {0.4, 2.2})
        for (double lam : {0.2, 3.0})
          CHECK(std::abs(s->v(t + u, lam) - s->v(t, s->v(u, lam))) <= 1e-8 * lam);
}

TEST_CASE("extinction boundary v_inf") {
  CHECK(feller().v_inf(std::log(2.0)).value() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(neveu().v_inf(0.7).is_infinite());
  CHECK(tempered().v_inf(1.0).is_infinite());
  CHECK(feller().v_inf(1e-3).value() ==
        doctest::Approx(oracles::feller_v_inf(1e-3)).epsilon(1e-6));
  // monotone divergence as t -> 0+
  CHECK(feller().v_inf(1e-3).value() > feller().v_inf(1e-2).value());
}

TEST_CASE("limit exponents") {
  CHECK(feller().kappa_lambda(2.0, 2.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(feller().kappa_inf(1.0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(feller().qsd_transform(1.0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(neveu().kappa_llogl(std::exp(1.0) - 1.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(neveu().kappa_llogl(0.0) == 0.0);
  CHECK_THROWS_AS(neveu().kappa_inf(1.0), std::domain_error);

  // kappa increases through 1 at theta = lambda
  CHECK(feller().kappa_lambda(1.0, 3.0) > 1.0);
  CHECK(feller().kappa_lambda(1.0, 0.3) < 1.0);
}

TEST_CASE("scale ratios") {
  CHECK(feller().c_ratio(2.0, 2.0) == 1.0);
  CHECK(neveu().c_ratio(3.0, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(feller().c_ratio(1.0, 2.0) == doctest::Approx(0.75).epsilon(1e-12));
  // inverse and cocycle identities
  for (const auto* s : {&feller(), &neveu()}) {
    CHECK(s->c_ratio(3.0, 1.0) * s->c_ratio(1.0, 3.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s->c_ratio(5.0, 0.5) ==
          doctest::Approx(s->c_ratio(5.0, 2.0) * s->c_ratio(2.0, 0.5)).epsilon(1e-12));
  }
  // kappa_lambda(theta) * kappa_theta(lambda) = 1
  CHECK(feller().kappa_lambda(2.0, 0.7) * feller().kappa_lambda(0.7, 2.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ratio convergence with monotone error decay") {
  for (const auto* s : {&feller(), &neveu()}) {
    const double target = s->c_ratio(3.0, 1.0);
    double prev = 1e300;
    for (double t : {5.0, 10.0, 20.0}) {
      const double err = std::abs(s->v(t, 3.0) / s->v(t, 1.0) - target);
      CHECK(err <= prev * (1.0 + 1e-12));
      prev = err;
    }
    CHECK(prev <= 1e-6);
  }
}

TEST_CASE("exponential-rate limit under the x log x condition") {
  for (double lam : {0.1, 1.0, 10.0}) {
    CHECK(std::exp(20.0) * neveu().v(20.0, lam) ==
          doctest::Approx(std::log1p(lam)).epsilon(1e-6));
    CHECK(std::exp(20.0) * feller().v(20.0, lam) ==
          doctest::Approx(feller().c_lambda(lam)).epsilon(1e-6));
  }
  CHECK(feller().c_lambda(1.0) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("qsd transform is completely monotone on a grid") {
  const int n = 8;
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) vals[i] = feller().qsd_transform(0.4 + 0.4 * i);
  double sign = -1.0;
  for (int level = 1; level < n; ++level) {
    for (int i = 0; i + level < n; ++i) vals[i] = vals[i + 1] - vals[i];
    for (int i = 0; i + level < n; ++i) CHECK(sign * vals[i] >= -1e-9);
    sign = -sign;
  }
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(feller().inv_psi_integral(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(feller().v(-1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(feller().v(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(feller().c_ratio(-1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(feller().kappa_lambda(1.0, 0.0), std::invalid_argument);
}

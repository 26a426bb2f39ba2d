#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "csbp/detail/quadrature.hpp"
#include "csbp/mechanism.hpp"

using namespace csbp;

namespace {
const double kE = std::exp(1.0);

std::vector<BranchingMechanism> builtins() {
  return {BranchingMechanism::feller(2.0, 1.0), BranchingMechanism::neveu(1.0),
          BranchingMechanism::with_levy(0.0, 1.0, TemperedStable{0.5, 1.0, 1.0}),
          BranchingMechanism::with_levy(0.0, 1.0, TemperedStable{1.5, 0.5, 0.8}),
          BranchingMechanism::with_levy(0.0, 1.0, TemperedStable{1.5, 0.5, 0.0}),
          BranchingMechanism::with_levy(0.0, 3.0, FiniteCompound{2.0, ExponentialJumps{1.0}}),
          BranchingMechanism::with_levy(0.5, 1.0, FiniteCompound{1.0, GammaJumps{2.0, 3.0}})};
}
}  // namespace

TEST_CASE("psi closed forms") {
  const auto feller = BranchingMechanism::feller(2.0, 1.0);
  CHECK(feller.psi(2.0) == doctest::Approx(6.0).epsilon(1e-12));
  const auto neveu = BranchingMechanism::neveu(1.0);
  CHECK(neveu.psi(kE - 1.0) == doctest::Approx(kE).epsilon(1e-12));
  for (const auto& m : builtins()) CHECK(m.psi(0.0) == 0.0);
}

TEST_CASE("psi matches direct quadrature of the jump integral") {
  // int (e^{-ux}-1+ux) pi(dx) by brute-force quadrature vs the closed form
  const auto check = [](const BranchingMechanism& m, auto density) {
    for (double u : {0.3, 1.0, 4.0}) {
      // expm1 keeps the compensated integrand accurate near 0, where the
      // naive form loses all digits against the x^{-alpha-1} blow-up; the
      // truncation at 1e-14 leaves a ~1e-7 relative sliver for alpha > 1
      const double direct = detail::integrate(
          [&](double x) { return (std::expm1(-u * x) + u * x) * density(x); }, 1e-14, 200.0,
          1e-13, 1e-12);
      CHECK(m.psi_above_linear(u) - 0.5 * m.sigma2() * u * u ==
            doctest::Approx(direct).epsilon(1e-6));
    }
  };
  check(BranchingMechanism::with_levy(0.0, 1.0, TemperedStable{0.5, 1.0, 1.0}),
        [](double x) { return std::pow(x, -1.5) * std::exp(-x); });
  check(BranchingMechanism::with_levy(0.0, 1.0, TemperedStable{1.5, 0.5, 0.8}),
        [](double x) { return 0.5 * std::pow(x, -2.5) * std::exp(-0.8 * x); });
  check(BranchingMechanism::with_levy(0.0, 3.0, FiniteCompound{2.0, ExponentialJumps{1.0}}),
        [](double x) { return 2.0 * std::exp(-x); });
}

TEST_CASE("derivatives at zero and infinity") {
  const auto feller = BranchingMechanism::feller(2.0, 1.0);
  CHECK(feller.psi_prime_zero() == 1.0);
  CHECK(feller.psi_prime_inf().is_infinite());

  const auto ts = BranchingMechanism::with_levy(0.0, 1.0, TemperedStable{0.5, 1.0, 1.0});
  CHECK(ts.psi_prime_inf().value() == doctest::Approx(1.0 + std::sqrt(M_PI)).epsilon(1e-14));
  CHECK(ts.levy_mean().value() == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-14));

  const auto fc =
      BranchingMechanism::with_levy(0.0, 3.0, FiniteCompound{2.0, ExponentialJumps{1.0}});
  CHECK(fc.psi_prime_inf().value() == doctest::Approx(5.0).epsilon(1e-14));

  CHECK(BranchingMechanism::neveu(1.0).psi_prime_inf().is_infinite());
  CHECK(BranchingMechanism::neveu(1.0).levy_mean().is_infinite());
  CHECK(BranchingMechanism::with_levy(0.0, 1.0, TemperedStable{1.5, 0.5, 0.0})
            .levy_mean()
            .is_infinite());
}

TEST_CASE("grey and L log L predicates") {
  CHECK(BranchingMechanism::feller(2.0, 1.0).grey_holds());
  CHECK_FALSE(BranchingMechanism::neveu(1.0).grey_holds());
  CHECK_FALSE(
      BranchingMechanism::with_levy(0.0, 1.0, TemperedStable{0.5, 1.0, 1.0}).grey_holds());
  CHECK(BranchingMechanism::with_levy(0.0, 1.0, TemperedStable{1.5, 0.5, 0.8}).grey_holds());
  CHECK(BranchingMechanism::with_levy(0.0, 1.0, TemperedStable{0.5, 1.0, 1.0}).llogl_holds());
  CHECK(BranchingMechanism::neveu(1.0).llogl_holds());
  for (const auto& m : builtins()) {
    const auto moment = m.levy_llogl_moment();
    if (m.llogl_holds() && moment.is_finite()) CHECK(moment.value() >= 0.0);
  }
}

TEST_CASE("grey predicate agrees with tail quadrature") {
  // bounded vs log-diverging behaviour of int_1^U du/Psi at U = 1e8
  for (const auto& m : builtins()) {
    const double to_u4 =
        detail::integrate([&](double u) { return 1.0 / m.psi(u); }, 1.0, 1e4, 1e-10, 1e-10);
    const double to_u8 =
        detail::integrate([&](double u) { return 1.0 / m.psi(u); }, 1.0, 1e8, 1e-10, 1e-10);
    if (m.grey_holds()) CHECK(to_u8 - to_u4 < 0.05 * to_u4);
    else CHECK(to_u8 - to_u4 > 0.5);  // keeps growing like a log
  }
}

TEST_CASE("convexity and linear lower bound on a grid") {
  for (const auto& m : builtins()) {
    double prev_ratio = 0.0;
    for (double u = 1e-3; u < 1e6; u *= 3.0) {
      CHECK(m.psi(u) >= m.gamma() * u * (1.0 - 1e-12));
      const double ratio = m.psi(u) / u;
      CHECK(ratio >= prev_ratio * (1.0 - 1e-12));  // Psi(u)/u non-decreasing
      prev_ratio = ratio;
    }
    // chord condition at a few triples
    for (double u = 0.1; u < 100.0; u *= 4.0) {
      const double v = 2.0 * u, w = 4.0 * u;
      const double chord = m.psi(u) + (m.psi(w) - m.psi(u)) * (v - u) / (w - u);
      CHECK(m.psi(v) <= chord * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("psi(u)/u converges to psi_prime_inf") {
  const auto ts = BranchingMechanism::with_levy(0.0, 1.0, TemperedStable{0.5, 1.0, 1.0});
  const double limit = ts.psi_prime_inf().value();
  CHECK(ts.psi(1e9) / 1e9 == doctest::Approx(limit).epsilon(1e-4));
  const auto fc =
      BranchingMechanism::with_levy(0.0, 3.0, FiniteCompound{2.0, ExponentialJumps{1.0}});
  CHECK(fc.psi(1e9) / 1e9 == doctest::Approx(5.0).epsilon(1e-4));
}

TEST_CASE("tail-scaled evaluation is consistent with psi") {
  for (const auto& m : builtins())
    for (double w : {1e-6, 1e-2, 1.0, 1e3, 1e12})
      if (1.0 / w < 1e15)  // direct psi still representable
        CHECK(m.psi_tail_scaled(w) ==
              doctest::Approx(w * w * m.psi(1.0 / w)).epsilon(1e-9));
  // and it stays finite where direct evaluation would overflow
  CHECK(std::isfinite(BranchingMechanism::feller(2.0, 1.0).psi_tail_scaled(1e-290)));
  CHECK(std::isfinite(
      BranchingMechanism::with_levy(0.0, 1.0, TemperedStable{1.5, 0.5, 0.8}).psi_tail_scaled(
          1e290)));
}

TEST_CASE("invalid mechanisms are rejected") {
  CHECK_THROWS_AS(BranchingMechanism::feller(2.0, 0.0), std::invalid_argument);   // critical
  CHECK_THROWS_AS(BranchingMechanism::feller(2.0, -1.0), std::invalid_argument);  // supercritical
  CHECK_THROWS_AS(BranchingMechanism::feller(0.0, 1.0), std::invalid_argument);   // linear
  CHECK_THROWS_AS(BranchingMechanism::with_levy(0.0, 1.0, std::monostate{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(BranchingMechanism::with_levy(0.0, 1.0, TemperedStable{2.5, 1.0, 1.0}),
                  std::invalid_argument);  // alpha out of range
  CHECK_THROWS_AS(BranchingMechanism::with_levy(0.0, 1.0, TemperedStable{0.5, 1.0, 0.0}),
                  std::invalid_argument);  // untempered needs alpha > 1
  CHECK_THROWS_AS(BranchingMechanism::with_levy(0.0, 1.0, TemperedStable{0.5, -1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      BranchingMechanism::with_levy(0.0, 1.0, FiniteCompound{0.0, ExponentialJumps{1.0}}),
      std::invalid_argument);
  CHECK_THROWS_AS(BranchingMechanism::feller(2.0, 1.0).psi(-0.5), std::invalid_argument);
}

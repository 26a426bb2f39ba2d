#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "csbp/flow.hpp"
#include "csbp/parallel.hpp"
#include "csbp/stats.hpp"
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

MonotonePath identity_path(double delta, double span) {
  MonotonePath p;
  for (double x = 0.0; x <= span; x += delta) {
    p.positions.push_back(x);
    p.values.push_back(x);
  }
  p.resolution = delta;
  return p;
}
}  // namespace

TEST_CASE("generalized inverse on grids") {
  const auto id = identity_path(0.01, 10.0);
  for (double x : {0.5, 3.14, 7.0}) CHECK(std::abs(invert_path(id, x) - x) <= 0.01);

  // a single jump maps the whole jump interval back to one individual
  MonotonePath jump;
  jump.positions = {0.0, 1.0};
  jump.values = {0.0, 5.0};
  jump.resolution = 1.0;
  CHECK(invert_path(jump, 2.0) == 1.0);
  CHECK_THROWS_AS(invert_path(jump, 6.0), std::out_of_range);
  CHECK_THROWS_AS(invert_path(jump, -1.0), std::invalid_argument);
}

TEST_CASE("pathwise duality holds exactly on the same realization") {
  const MarginalSampler ms(feller(), 0.7);
  RngStream rng(17, 1);
  std::vector<double> grid;
  for (double x = 0.05; x <= 12.0; x += 0.05) grid.push_back(x);
  const auto p = sample_increment_grid(ms, grid, rng);
  for (double x : {0.3, 1.0, 2.7}) {
    const double inv = invert_path(p, x);
    for (double y : {0.5, 1.0, 3.0, 8.0}) {
      const bool lhs = inv > y;
      const bool rhs = p.value_at(y) <= x;
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("lineage stepping, coalescence and absorption") {
  MonotonePath jump;
  jump.positions = {0.0, 1.0, 2.0};
  jump.values = {0.0, 5.0, 6.0};
  jump.resolution = 1.0;
  auto ens = make_lineage_ensemble(std::vector<double>{2.0, 4.0, 5.5});
  ens = step_lineages(std::move(ens), jump, 0.1);
  // states 2 and 4 sit inside the first jump interval and merge
  CHECK(ens.states[0] == 1.0);
  CHECK(ens.states[1] == 1.0);
  CHECK(ens.states[2] == 2.0);
  CHECK(ens.group[0] == ens.group[1]);
  CHECK(ens.group[2] != ens.group[0]);
  REQUIRE(ens.events.size() == 1);
  CHECK(ens.events[0].members == std::vector<int>{0, 1});
  // merged sets only grow
  auto ens2 = step_lineages(ens, jump, 0.1);
  CHECK(ens2.group[0] == ens2.group[1]);

  // composition over identity segments drifts by at most one cell per step
  auto idens = make_lineage_ensemble(std::vector<double>{1.0});
  const auto id = identity_path(0.01, 4.0);
  for (int k = 0; k < 5; ++k) idens = step_lineages(std::move(idens), id, 0.1);
  CHECK(std::abs(idens.states[0] - 1.0) <= 5 * 0.01 + 1e-12);
}

TEST_CASE("distributional duality against forward marginals") {
  const double t = std::log(2.0), x = 1.0, y = 1.0;
  const MarginalSampler seg(feller(), t);
  const std::uint64_t n = 100000;
  RngStream base(17, 2);
  std::uint64_t lhs = 0, rhs = 0;
  auto l = mc_samples(n, base.split(0), 2, [&](RngStream& r) {
    const double q[1] = {x};
    return inverse_flow_marginals(seg, 0.004, q, r)[0] > y ? 1.0 : 0.0;
  });
  auto rr = mc_samples(n, base.split(1), 2,
                       [&](RngStream& r) { return x > seg.sample(y, r) ? 1.0 : 0.0; });
  for (double v : l) lhs += v > 0.5;
  for (double v : rr) rhs += v > 0.5;
  const double p1 = static_cast<double>(lhs) / n, p2 = static_cast<double>(rhs) / n;
  const double se = std::sqrt((p1 * (1 - p1) + p2 * (1 - p2)) / static_cast<double>(n));
  CHECK(std::abs(p1 - p2) <= 3.0 * se);
}

TEST_CASE("two half-steps equal one full step in law") {
  const std::uint64_t n = 10000;
  const double dt = 0.05, delta = 0.004;
  const MarginalSampler half(feller(), dt);
  const MarginalSampler full(feller(), 2.0 * dt);
  RngStream base(17, 3);
  auto two_steps = mc_samples(n, base.split(0), 2, [&](RngStream& r) {
    const double q[1] = {1.0};
    const double mid = inverse_flow_marginals(half, delta, q, r)[0];
    const double q2[1] = {mid};
    return inverse_flow_marginals(half, delta, q2, r)[0];
  });
  auto one_step = mc_samples(n, base.split(1), 2, [&](RngStream& r) {
    const double q[1] = {1.0};
    return inverse_flow_marginals(full, delta, q, r)[0];
  });
  CHECK(two_sample_ks(two_steps, one_step) > 0.01);
}

TEST_CASE("transience of the ancestral lineage") {
  const MarginalSampler seg(feller(), 15.0);
  RngStream base(17, 4);
  const double delta = 1e-3 * std::exp(15.0);
  const std::uint64_t n = 1000;
  auto far = mc_samples(n, base, 2, [&](RngStream& r) {
    const double q[1] = {1.0};
    return inverse_flow_marginals(seg, delta, q, r)[0] > 100.0 ? 1.0 : 0.0;
  });
  double frac = 0.0;
  for (double v : far) frac += v;
  CHECK(frac / static_cast<double>(n) >= 0.99);
}

TEST_CASE("regularity: upward levels are reached with positive probability") {
  LineageSimOptions o;
  o.horizon = 10.0;
  o.dt = 0.01;
  o.delta = 0.007;
  o.stop_when_levels_hit = true;
  RngStream base(17, 5);
  int hits = 0;
  for (int rep = 0; rep < 100; ++rep) {
    RngStream r = base.split(rep);
    const double xs[1] = {1.0};
    const double lv[1] = {2.0};
    const auto traj = simulate_lineages(feller(), xs, lv, o, r);
    hits += traj.final_state.hit_times[0][0] != kNeverHit;
  }
  CHECK(hits > 0);
}

TEST_CASE("monotone coupling along full trajectories") {
  LineageSimOptions o;
  o.horizon = 2.0;
  o.dt = 0.02;
  o.delta = 0.01;
  o.record_trajectory = true;
  RngStream rng(17, 6);
  const double xs[3] = {0.5, 1.0, 2.0};
  const auto traj = simulate_lineages(feller(), xs, {}, o, rng);
  for (const auto& states : traj.states)
    for (std::size_t i = 1; i < states.size(); ++i) CHECK(states[i] >= states[i - 1]);
}

TEST_CASE("exponential-initial-condition semigroup identity") {
  const auto exact = exp_init_semigroup_test(feller(), 1.0, 0.0, Probe::exp_neg, 100, 0.01,
                                             RngStream(17, 7));
  CHECK(exact.mc_mean == exact.exact);  // t = 0 is exact on both sides

  const auto c = exp_init_semigroup_test(feller(), 1.0, std::log(2.0), Probe::exp_neg, 40000,
                                         0.004, RngStream(17, 8), 2);
  CHECK(c.exact == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(std::abs(c.z) <= 3.0);

  const double vn = std::exp(0.5) - 1.0;  // Neveu v at t = ln 2, q = e - 1
  const auto cn = exp_init_semigroup_test(neveu(), std::exp(1.0) - 1.0, std::log(2.0),
                                          Probe::exp_neg, 40000, 0.004, RngStream(17, 9), 2);
  CHECK(cn.exact == doctest::Approx(vn / (1.0 + vn)).epsilon(1e-9));
  CHECK(std::abs(cn.z) <= 3.0);

  const auto cw = exp_init_semigroup_test(feller(), 1.0, 1.0, Probe::one_wedge, 40000, 0.005,
                                          RngStream(17, 10), 2);
  CHECK(std::abs(cw.z) <= 3.0);
}

TEST_CASE("invariant-function martingale") {
  const auto exact = martingale_test(feller(), 1.0, 1.0, 0.0, 100, 0.01, RngStream(17, 11));
  CHECK(exact.mc_mean == exact.target);
  const auto c = martingale_test(feller(), 1.0, 1.0, 1.0, 20000, 0.004, RngStream(17, 12), 2);
  CHECK(c.target == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(c.z) <= 3.0);
}

TEST_CASE("entrance boundary: tiny initial points forget their start") {
  LineageSimOptions o;
  o.horizon = 1.0;
  o.dt = 0.01;
  o.delta = 1e-4;
  o.record_trajectory = true;
  RngStream base(17, 13);
  int ok = 0;
  const int paths = 200;
  for (int rep = 0; rep < paths; ++rep) {
    RngStream r = base.split(rep);
    const double xs[2] = {1e-6, 1e-3};
    const auto traj = simulate_lineages(feller(), xs, {}, o, r);
    double sup_gap = 0.0;
    for (std::size_t k = traj.times.size() / 2; k < traj.times.size(); ++k)
      sup_gap = std::max(sup_gap, traj.states[k][1] - traj.states[k][0]);
    ok += sup_gap < 0.05;
  }
  CHECK(ok >= static_cast<int>(0.95 * paths));
}

TEST_CASE("hitting-time transform with discretization refinement") {
  LineageSimOptions coarse;
  coarse.horizon = 30.0;
  coarse.dt = 0.01;
  coarse.delta = 0.007;
  coarse.barrier_correction = true;
  const auto h1 = hitting_transform_mc(feller(), 1.0, 1.0, 3.0, coarse, 1500,
                                       RngStream(17, 14), 2);
  CHECK(std::abs(h1.mean - 0.5) <= 3.0 * h1.se);
  CHECK(h1.hit_fraction == doctest::Approx(1.0).epsilon(0.01));

  LineageSimOptions fine = coarse;
  fine.dt = 0.005;
  fine.delta = 0.0035;
  const auto h2 = hitting_transform_mc(feller(), 1.0, 1.0, 3.0, fine, 1500,
                                       RngStream(17, 15), 2);
  CHECK(std::abs(h1.mean - h2.mean) <= h1.se + h2.se);
}

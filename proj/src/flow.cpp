#include "csbp/flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "csbp/laplace.hpp"
#include "csbp/parallel.hpp"

namespace csbp {

double invert_path(const MonotonePath& p, double x) {
  if (x < 0.0) throw std::invalid_argument("invert_path: x must be >= 0");
  const auto it = std::upper_bound(p.values.begin(), p.values.end(), x);
  if (it == p.values.end())
    throw std::out_of_range("invert_path: path does not cover the query level");
  return p.positions[it - p.values.begin()];
}

LineageEnsemble make_lineage_ensemble(std::span<const double> xs, std::span<const double> levels) {
  if (xs.empty()) throw std::invalid_argument("make_lineage_ensemble: no query points");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0)) throw std::invalid_argument("make_lineage_ensemble: points must be > 0");
    if (i > 0 && !(xs[i] > xs[i - 1]))
      throw std::invalid_argument("make_lineage_ensemble: points must be strictly ascending");
  }
  LineageEnsemble e;
  e.query_points.assign(xs.begin(), xs.end());
  e.states = e.query_points;
  e.group.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) e.group[i] = static_cast<int>(i);
  e.levels.assign(levels.begin(), levels.end());
  e.hit_times.assign(levels.size(), std::vector<double>(xs.size(), kNeverHit));
  // levels already crossed at time 0
  for (std::size_t j = 0; j < e.levels.size(); ++j)
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (e.states[i] >= e.levels[j]) e.hit_times[j][i] = 0.0;
  return e;
}

namespace {

// Shared bookkeeping for one backward step: states replaced by inverses,
// merges recorded, crossings stamped with the step's left endpoint.
void apply_step(LineageEnsemble& e, std::span<const double> new_states, double dt) {
  const double t_left = e.time;
  e.time += dt;
  for (std::size_t i = 0; i < e.states.size(); ++i) e.states[i] = new_states[i];
  // merged-lineage sets only grow; merge whenever neighbours share a cell
  for (std::size_t i = 1; i < e.states.size(); ++i) {
    if (e.states[i] == e.states[i - 1] && e.group[i] != e.group[i - 1]) {
      const int from = e.group[i], into = e.group[i - 1];
      LineageEnsemble::CoalescenceEvent ev;
      ev.time = e.time;
      for (std::size_t k = 0; k < e.group.size(); ++k) {
        if (e.group[k] == from) e.group[k] = into;
        if (e.group[k] == into) ev.members.push_back(static_cast<int>(k));
      }
      std::sort(ev.members.begin(), ev.members.end());
      e.events.push_back(std::move(ev));
    }
  }
  for (std::size_t j = 0; j < e.levels.size(); ++j)
    for (std::size_t i = 0; i < e.states.size(); ++i)
      if (e.hit_times[j][i] == kNeverHit && e.states[i] >= e.levels[j])
        e.hit_times[j][i] = t_left;
}

}  // namespace

LineageEnsemble step_lineages(LineageEnsemble ens, const MonotonePath& segment, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_lineages: dt must be positive");
  std::vector<double> inv(ens.states.size());
  for (std::size_t i = 0; i < ens.states.size(); ++i) inv[i] = invert_path(segment, ens.states[i]);
  apply_step(ens, inv, dt);
  return ens;
}

std::vector<double> inverse_flow_marginals(const MarginalSampler& segment_sampler, double delta,
                                           std::span<const double> sorted_x, RngStream& rng) {
  if (!(delta > 0.0)) throw std::invalid_argument("inverse_flow_marginals: delta must be > 0");
  for (std::size_t i = 1; i < sorted_x.size(); ++i)
    if (sorted_x[i] < sorted_x[i - 1])
      throw std::invalid_argument("inverse_flow_marginals: query points must be sorted");
  std::vector<double> out(sorted_x.size());
  std::size_t next = 0;
  if (!sorted_x.empty() && sorted_x.front() < 0.0)
    throw std::invalid_argument("inverse_flow_marginals: query points must be >= 0");
  // The true inverse lies in ((i-1)delta, i*delta]; reporting the cell
  // midpoint removes the O(delta) upward bias that would otherwise compound
  // over repeated backward steps.
  double value = 0.0, pos = 0.0;
  std::uint64_t cells = 0;
  while (next < sorted_x.size()) {
    pos += delta;
    value += segment_sampler.sample(delta, rng);
    while (next < sorted_x.size() && value > sorted_x[next]) out[next++] = pos - 0.5 * delta;
    if (++cells > (1ull << 33))
      throw std::runtime_error("inverse_flow_marginals: cell budget exceeded");
  }
  return out;
}

LineageTrajectory simulate_lineages(const CumulantSolver& s, std::span<const double> xs,
                                    std::span<const double> levels, const LineageSimOptions& opts,
                                    RngStream& rng) {
  if (!(opts.horizon > 0.0) || !(opts.dt > 0.0) || !(opts.delta > 0.0))
    throw std::invalid_argument("simulate_lineages: horizon, dt, delta must be positive");
  const MarginalSampler cell(s, opts.dt, opts.method);
  LineageTrajectory traj;
  std::vector<double> monitored(levels.begin(), levels.end());
  if (opts.barrier_correction) {
    constexpr double kBgk = 0.5826;  // -zeta(1/2)/sqrt(2 pi)
    const double sig = std::sqrt(s.mechanism().sigma2());
    for (double& y : monitored) y -= kBgk * sig * std::sqrt(y * opts.dt);
  }
  traj.final_state = make_lineage_ensemble(xs, monitored);
  auto& ens = traj.final_state;
  if (opts.record_trajectory) {
    traj.times.push_back(0.0);
    traj.states.push_back(ens.states);
    traj.groups.push_back(ens.group);
  }

  // One pass per step over a fresh lazily-sampled segment inverts all
  // states at once (states are maintained in non-decreasing order).
  std::vector<double> inv(ens.states.size());
  const std::uint64_t n_steps = static_cast<std::uint64_t>(std::ceil(opts.horizon / opts.dt));
  for (std::uint64_t k = 0; k < n_steps; ++k) {
    std::size_t next = 0;
    double value = 0.0, pos = 0.0;
    std::uint64_t cells = 0;
    while (next < ens.states.size()) {
      pos += opts.delta;
      value += cell.sample(opts.delta, rng);
      while (next < ens.states.size() && value > ens.states[next])
        inv[next++] = pos - 0.5 * opts.delta;  // mid-cell, as in inverse_flow_marginals
      if (++cells > (1ull << 33))
        throw std::runtime_error("simulate_lineages: cell budget exceeded within a step");
    }
    apply_step(ens, inv, opts.dt);
    if (opts.record_trajectory) {
      traj.times.push_back(ens.time);
      traj.states.push_back(ens.states);
      traj.groups.push_back(ens.group);
    }
    if (opts.stop_when_levels_hit && !ens.levels.empty()) {
      bool all_hit = true;
      for (const auto& lv : ens.hit_times)
        for (double h : lv) all_hit = all_hit && h != kNeverHit;
      if (all_hit) break;
    }
  }
  ens.levels.assign(levels.begin(), levels.end());  // report the nominal levels
  return traj;
}

SemigroupCheck exp_init_semigroup_test(const CumulantSolver& s, double q, double t, Probe probe,
                                       std::uint64_t replicas, double delta,
                                       const RngStream& base, int threads) {
  if (!(q > 0.0) || !(t >= 0.0))
    throw std::invalid_argument("exp_init_semigroup_test: need q > 0, t >= 0");
  SemigroupCheck out;
  out.replicas = replicas;
  const double vt = t == 0.0 ? q : s.v(t, q);
  out.exact = probe == Probe::exp_neg ? vt / (1.0 + vt) : -std::expm1(-vt) / vt;
  if (t == 0.0) {  // both sides are E[f(Exp(q))] exactly
    out.mc_mean = out.exact;
    return out;
  }
  const MarginalSampler segment(s, t);
  const auto draws = mc_samples(replicas, base, threads, [&](RngStream& r) {
    const double x0 = r.exponential(q);
    double state[1] = {x0};
    const auto inv = inverse_flow_marginals(segment, delta, state, r);
    return probe == Probe::exp_neg ? std::exp(-inv[0]) : std::min(1.0, inv[0]);
  });
  const McSummary sum = summarize(draws);
  out.mc_mean = sum.mean;
  out.mc_se = sum.std_err;
  out.z = sum.std_err > 0.0 ? (sum.mean - out.exact) / sum.std_err : 0.0;
  return out;
}

namespace {

// Log-log interpolation cache of f_theta for Monte Carlo loops; direct
// inversions are ~10ms each, far too slow per replica.
class InvariantFunctionCache {
 public:
  InvariantFunctionCache(const CumulantSolver& s, double theta, double x_lo, double x_hi,
                         std::size_t nodes = 512)
      : fn_(s, theta) {
    log_x_.resize(nodes);
    log_f_.resize(nodes);
    const double la = std::log(x_lo), lb = std::log(x_hi);
    for (std::size_t i = 0; i < nodes; ++i) {
      log_x_[i] = la + (lb - la) * i / (nodes - 1.0);
      log_f_[i] = std::log(fn_(std::exp(log_x_[i])));
    }
  }

  double operator()(double x) const {
    const double lx = std::log(x);
    if (lx <= log_x_.front() || lx >= log_x_.back()) return fn_(x);
    const auto it = std::upper_bound(log_x_.begin(), log_x_.end(), lx);
    const std::size_t i = (it - log_x_.begin()) - 1;
    const double w = (lx - log_x_[i]) / (log_x_[i + 1] - log_x_[i]);
    return std::exp(log_f_[i] + w * (log_f_[i + 1] - log_f_[i]));
  }

 private:
  InvariantFunction fn_;
  std::vector<double> log_x_, log_f_;
};

}  // namespace

MartingaleCheck martingale_test(const CumulantSolver& s, double theta, double x, double t,
                                std::uint64_t replicas, double delta, const RngStream& base,
                                int threads) {
  if (!(x > 0.0) || !(t >= 0.0)) throw std::invalid_argument("martingale_test: need x>0, t>=0");
  MartingaleCheck out;
  out.target = f_theta(s, theta, x);
  if (t == 0.0) {
    out.mc_mean = out.target;
    return out;
  }
  const double scale = x * std::exp(s.mechanism().gamma() * t);
  const InvariantFunctionCache f(s, theta, std::max(1e-12, 1e-4 * scale), 1e4 * scale);
  const MarginalSampler segment(s, t);
  const double damp = std::exp(-theta * t);
  const auto draws = mc_samples(replicas, base, threads, [&](RngStream& r) {
    double state[1] = {x};
    const auto inv = inverse_flow_marginals(segment, delta, state, r);
    return damp * f(inv[0]);
  });
  const McSummary sum = summarize(draws);
  out.mc_mean = sum.mean;
  out.mc_se = sum.std_err;
  out.z = sum.std_err > 0.0 ? (sum.mean - out.target) / sum.std_err : 0.0;
  return out;
}

HittingTransformMc hitting_transform_mc(const CumulantSolver& s, double theta, double x, double y,
                                        const LineageSimOptions& opts, std::uint64_t replicas,
                                        const RngStream& base, int threads) {
  if (!(x > 0.0) || !(y > x)) throw std::invalid_argument("hitting_transform_mc: need 0 < x < y");
  LineageSimOptions o = opts;
  o.stop_when_levels_hit = true;
  if (s.mechanism().sigma2() == 0.0) o.barrier_correction = false;
  const double xs[1] = {x};
  const double lv[1] = {y};
  const auto draws = mc_samples(replicas, base, threads, [&](RngStream& r) {
    const auto traj = simulate_lineages(s, xs, lv, o, r);
    const double hit = traj.final_state.hit_times[0][0];
    return hit == kNeverHit ? 0.0 : std::exp(-theta * hit);
  });
  const McSummary sum = summarize(draws);
  HittingTransformMc out;
  out.mean = sum.mean;
  out.se = sum.std_err;
  out.replicas = replicas;
  std::size_t hits = 0;
  for (double d : draws) hits += d > 0.0 ? 1 : 0;
  out.hit_fraction = static_cast<double>(hits) / static_cast<double>(replicas);
  return out;
}

}  // namespace csbp

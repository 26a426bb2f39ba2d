#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "csbp/cumulant.hpp"
#include "csbp/rng.hpp"
#include "csbp/sampler.hpp"

namespace csbp {

/// Right-continuous generalized inverse on the grid: smallest grid position
/// whose value exceeds x. Throws when the path does not cover x (the caller
/// extends the grid).
double invert_path(const MonotonePath& p, double x);

/// States of ancestral lineages under backward-time evolution. The state of
/// lineage i is the ancestor label of query point x_i after `time` of
/// backward evolution; states stay ordered, and once two lineages share a
/// grid cell they are merged for good.
struct LineageEnsemble {
  std::vector<double> query_points;  // x_1 < ... < x_n
  std::vector<double> states;
  double time = 0.0;
  std::vector<int> group;  // coalescence class label (smallest member index)

  struct CoalescenceEvent {
    double time;
    std::vector<int> members;
  };
  std::vector<CoalescenceEvent> events;

  std::vector<double> levels;                  // monitored crossing levels y_j
  std::vector<std::vector<double>> hit_times;  // [level][lineage], inf until crossed
};

LineageEnsemble make_lineage_ensemble(std::span<const double> xs,
                                      std::span<const double> levels = {});

/// One backward step through a fresh independent segment: every state is
/// replaced by the generalized inverse of the segment at that state.
/// Coalescences are recorded when states land on the same grid position;
/// crossing times are recorded at the left endpoint of the crossing step.
LineageEnsemble step_lineages(LineageEnsemble ens, const MonotonePath& segment, double dt);

/// Joint single-segment inverse flow: ancestors of all (sorted) query points
/// at backward time t off one fresh duration-t segment, sampled lazily at
/// resolution delta until every query is inverted.
std::vector<double> inverse_flow_marginals(const MarginalSampler& segment_sampler, double delta,
                                           std::span<const double> sorted_x, RngStream& rng);

struct LineageSimOptions {
  double horizon = 1.0;
  double dt = 0.01;
  double delta = 1e-3;
  MarginalMethod method = MarginalMethod::auto_select;  // per-cell increment sampler
  bool record_trajectory = false;
  bool stop_when_levels_hit = false;  // early exit once every lineage crossed every level
  // Continuity correction for discretely monitored level crossings: shift
  // each monitored level down by 0.5826 sigma sqrt(y dt) (the diffusive
  // local scale), compensating the O(sqrt(dt)) missed-crossing bias.
  // Only meaningful for mechanisms with a diffusion part.
  bool barrier_correction = false;
};

struct LineageTrajectory {
  std::vector<double> times;                 // recorded when record_trajectory
  std::vector<std::vector<double>> states;   // [time][lineage]
  std::vector<std::vector<int>> groups;      // [time][lineage] coalescence labels
  LineageEnsemble final_state;
};

/// Full backward trajectory by repeated inversion of i.i.d. dt-segments.
LineageTrajectory simulate_lineages(const CumulantSolver& s, std::span<const double> xs,
                                    std::span<const double> levels, const LineageSimOptions& opts,
                                    RngStream& rng);

enum class Probe { exp_neg, one_wedge };  // f(u) = e^{-u}, f(u) = 1 ∧ u

struct SemigroupCheck {
  double mc_mean = 0.0;
  double mc_se = 0.0;
  double exact = 0.0;  // E[f(Exp(v_t(q)))], closed form for both probes
  double z = 0.0;
  std::uint64_t replicas = 0;
};

/// Exponential-initial-condition semigroup identity: the lineage started
/// from Exp(q) after backward time t is Exp(v_t(q)); compares the Monte
/// Carlo mean of f against the direct expectation.
SemigroupCheck exp_init_semigroup_test(const CumulantSolver& s, double q, double t, Probe probe,
                                       std::uint64_t replicas, double delta,
                                       const RngStream& base, int threads = 0);

struct MartingaleCheck {
  double mc_mean = 0.0;
  double mc_se = 0.0;
  double target = 0.0;  // f_theta(x)
  double z = 0.0;
};

/// E[e^{-theta t} f_theta(lineage at t)] = f_theta(x).
MartingaleCheck martingale_test(const CumulantSolver& s, double theta, double x, double t,
                                std::uint64_t replicas, double delta, const RngStream& base,
                                int threads = 0);

struct HittingTransformMc {
  double mean = 0.0;  // MC mean of e^{-theta T_y} (paths that never cross count 0)
  double se = 0.0;
  double hit_fraction = 0.0;
  std::uint64_t replicas = 0;
};

/// First-crossing-time transform from a single lineage started at x;
/// crossing recorded at the left endpoint of the step (bias <= dt).
HittingTransformMc hitting_transform_mc(const CumulantSolver& s, double theta, double x, double y,
                                        const LineageSimOptions& opts, std::uint64_t replicas,
                                        const RngStream& base, int threads = 0);

inline constexpr double kNeverHit = std::numeric_limits<double>::infinity();

}  // namespace csbp

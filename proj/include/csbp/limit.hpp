#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "csbp/cumulant.hpp"
#include "csbp/extended_real.hpp"
#include "csbp/rng.hpp"

namespace csbp {

/// Inverse-CDF table over the Lévy tail nu_bar_lam of the limit
/// subordinator, built once from the numerical inversion and amortized over
/// all jump draws. Log-log interpolation between nodes; flat extrapolation
/// to the total mass below the grid.
class LevyTailTable {
 public:
  LevyTailTable(const CumulantSolver& s, ExtReal lam, double eps, std::size_t points = 4096);

  double tail(double x) const;  // nu_bar(x); x >= 0 (x=0 gives the mass at eps=0)
  /// One jump from nu restricted to (eps, inf), normalized.
  double sample_jump(RngStream& rng) const;
  /// nu_bar(eps): the finite jump rate of the (possibly truncated) process.
  double rate() const { return rate_; }
  double eps() const { return eps_; }

 private:
  std::vector<double> log_x_, log_tail_;
  double rate_;
  double eps_;
  double x_lo_, x_hi_;
  double tail_lo_, tail_hi_;
};

/// Drift-free subordinator realization: jump times over [0, horizon] and
/// sizes; eps > 0 marks a small-jump truncation (infinite Lévy mass case).
struct SubordinatorPath {
  std::vector<double> jump_times;  // ascending
  std::vector<double> jump_sizes;
  double horizon = 0.0;
  double eps = 0.0;
  double rate = 0.0;                 // jump intensity used
  double truncated_mass_rate = 0.0;  // int_0^eps u nu(du), upward bias bound on the inverse
};

/// Sampling machinery for the limit subordinator W^lambda with Laplace
/// exponent kappa_lambda (kappa_inf when lam is the infinite marker, which
/// requires Grey's condition: compound Poisson with jump law nu_inf, the
/// quasi-stationary distribution).
class LimitSampler {
 public:
  LimitSampler(const CumulantSolver& s, ExtReal lam, double eps, std::size_t table_points = 4096);

  /// eps = 0 when the Lévy mass is finite; otherwise the truncation level
  /// tuned so the dropped drift int_0^eps u nu(du) stays below `bias_budget`.
  static double auto_eps(const CumulantSolver& s, ExtReal lam, double bias_budget = 1e-4);

  SubordinatorPath simulate(double y_max, RngStream& rng) const;
  /// Marginal W(y) without materializing the path.
  double marginal(double y, RngStream& rng) const;
  /// First passage inf{y : W(y) >= x}, i.e. one draw of the inverse at x.
  double first_passage(double x, RngStream& rng) const;

  const LevyTailTable& table() const { return table_; }
  double truncated_mass_rate() const { return truncated_mass_rate_; }

 private:
  LevyTailTable table_;
  double truncated_mass_rate_;
};

SubordinatorPath simulate_W(const CumulantSolver& s, ExtReal lam, double y_max, double eps,
                            RngStream& rng);

/// Left-continuous inverse W^{-1}(x) = inf{y : W(y) >= x}; throws when the
/// path's horizon is insufficient.
double invert_W(const SubordinatorPath& p, double x);

/// Partition of (0, x_max] into maximal intervals of constancy of the
/// inverse = jump intervals of W. boundaries[0] = 0; family i is
/// (boundaries[i-1], boundaries[i]] with length lengths[i-1]; ages are the
/// increments of the inverse across boundaries (inter-jump times of W).
struct InversePartition {
  std::vector<double> boundaries;      // x_0 = 0 < x_1 < ... <= x_max
  std::vector<double> lengths;         // family lengths (jump sizes)
  std::vector<double> ages;            // age increments; i.i.d. Exp(1) when mass = 1
  std::vector<double> inverse_values;  // W^{-1}(x_i) at the boundaries
  bool finite_mass = false;            // renewal description valid (Grey, eps = 0)
  double eps = 0.0;
};

InversePartition ancestral_partition(const SubordinatorPath& p, double x_max);

/// Analytic Hausdorff index gamma / Psi'(inf) of the set of ancestors
/// (0 when Psi'(inf) is infinite).
double hausdorff_index(const BranchingMechanism& m);

struct BoxCountEstimate {
  double slope = 0.0;  // diagnostic-only fractal-dimension estimate
  std::vector<double> scales;
  std::vector<std::size_t> counts;
};

/// Box-count of the closure of the range of W within [0, x_max] over the
/// given scales; least-squares slope of log N against log(1/s). Labeled
/// diagnostic: acceptance rests on the analytic index.
BoxCountEstimate box_count_estimate(const SubordinatorPath& p, double x_max,
                                    std::span<const double> scales);

/// Escape speed of family i at backward time t: W^{-1}(x_i) / v_t(inf);
/// requires Grey's condition.
double family_speed(const InversePartition& part, std::size_t i, const CumulantSolver& s,
                    double t);

}  // namespace csbp

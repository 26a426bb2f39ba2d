#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "csbp/cumulant.hpp"
#include "csbp/rng.hpp"

namespace csbp {

/// One-sided (positive) stable variate with Laplace convention
/// E e^{-q S} = exp(-scale q^alpha), alpha in (0,1). Kanter's representation:
/// S = scale^{1/alpha} (A(U)/E)^{(1-alpha)/alpha} with U uniform on (0,pi),
/// E standard exponential, evaluated in logs for stability near alpha -> 1.
double sample_stable_one_sided(double alpha, double scale, RngStream& rng);

/// Compound Poisson over unit time: sum of Poisson(rate) jumps.
double sample_compound_poisson(double rate, const std::function<double(RngStream&)>& jump,
                               RngStream& rng);

enum class MarginalMethod { auto_select, feller_exact, neveu_tilted_stable, generic_cdf_inversion };

/// Draws of the branching-process marginal X_t(x), E e^{-lambda X_t(x)} =
/// e^{-x v_t(lambda)}.
///
///  feller_exact          pi = 0: compound Poisson(x v_t(inf)) of
///                        Exp(b_t) jumps, b_t = v_t(inf) e^{gamma t}.
///  neveu_tilted_stable   exponential tilting of a one-sided stable with
///                        index e^{-gamma t}; the initial mass is split into
///                        chunks of at most 0.1 so the acceptance rate
///                        e^{-chunk} stays near 1, exact in law by the
///                        branching property.
///  generic_cdf_inversion inverse-CDF lookup on a cached table built by
///                        numerically inverting e^{-x v_t(q)}/q; one table
///                        per (t, mass), guarded for concurrent use.
///
/// auto_select: feller_exact when pi = 0; for the Neveu mechanism the tilted
/// sampler up to mass 10 and the table beyond (rejection cost grows with the
/// chunk count); the table otherwise. Untempered stable mechanisms are
/// rejected (analytic layer only).
class MarginalSampler {
 public:
  MarginalSampler(const CumulantSolver& s, double t,
                  MarginalMethod method = MarginalMethod::auto_select);

  double sample(double x, RngStream& rng) const;

  double t() const { return t_; }
  MarginalMethod method() const { return method_; }
  const CumulantSolver& solver() const { return *solver_; }
  /// P(X_t(x) = 0) = e^{-x v_t(inf)}; zero when Grey's condition fails.
  double extinction_probability(double x) const;

 private:
  struct CdfTable {
    std::vector<double> z, cdf;  // strictly increasing grid, nondecreasing cdf
    double atom_at_zero = 0.0;
    double sample(RngStream& rng) const;
  };

  double sample_feller(double x, RngStream& rng) const;
  double sample_neveu(double x, RngStream& rng) const;
  double sample_generic(double x, RngStream& rng) const;
  const CdfTable& table_for_mass(double x) const;

  const CumulantSolver* solver_;
  double t_;
  MarginalMethod method_;
  double v_inf_ = 0.0;   // finite iff Grey
  bool grey_ = false;
  double feller_jump_rate_ = 0.0;  // b_t
  double beta_ = 0.0;              // e^{-gamma t}
  mutable std::map<double, std::shared_ptr<const CdfTable>> tables_;
  mutable std::mutex table_mutex_;
};

/// Non-decreasing right-continuous grid function (a sampled subordinator
/// path y -> X_t(y)); shared with the flow module.
struct MonotonePath {
  std::vector<double> positions;  // strictly ascending, positions[0] = 0
  std::vector<double> values;     // non-decreasing, values[0] = 0
  double resolution = 0.0;        // max grid gap

  /// Right-continuous step evaluation at y (last grid value at or before y).
  double value_at(double y) const;
};

/// Path on the given strictly ascending grid from independent increments:
/// value at x_i is the sum of marginal draws with initial masses
/// x_{i+1} - x_i (branching property).
MonotonePath sample_increment_grid(const MarginalSampler& ms, std::span<const double> x_grid,
                                   RngStream& rng);

}  // namespace csbp

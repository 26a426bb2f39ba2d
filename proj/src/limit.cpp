#include "csbp/limit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "csbp/detail/quadrature.hpp"
#include "csbp/laplace.hpp"

namespace csbp {

LevyTailTable::LevyTailTable(const CumulantSolver& s, ExtReal lam, double eps,
                             std::size_t points) {
  if (eps < 0.0) throw std::invalid_argument("LevyTailTable: eps must be >= 0");
  const ExtReal mass = levy_total_mass(s, lam);
  if (eps == 0.0 && mass.is_infinite())
    throw std::invalid_argument("LevyTailTable: infinite Lévy mass needs a truncation level");
  eps_ = eps;

  InversionOptions opts;  // absolute floor set once the mass scale is known
  auto tail_at = [&](double x) { return levy_tail(s, lam, x, opts); };

  // Locate the working range: x_lo where the tail has flattened to the mass
  // (or the truncation level), x_hi where it is negligible.
  double lo;
  if (eps > 0.0) {
    lo = eps;
    rate_ = tail_at(eps);
  } else {
    const double m = mass.value();
    opts.abs_tol = 1e-9 * m;
    lo = 1.0;
    while (m - tail_at(lo) > 1e-7 * m && lo > 1e-12) lo *= 0.25;
    rate_ = m;
  }
  opts.abs_tol = 1e-9 * rate_;
  double hi = std::max(1.0, 2.0 * lo);
  while (tail_at(hi) > rate_ * 1e-8 && hi < 1e14) hi *= 2.0;

  x_lo_ = lo;
  x_hi_ = hi;
  log_x_.resize(points);
  log_tail_.resize(points);
  const double la = std::log(lo), lb = std::log(hi);
  double prev = rate_;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = std::exp(la + (lb - la) * i / (points - 1.0));
    double t = std::min(tail_at(x), prev);          // enforce monotone decrease
    t = std::max(t, rate_ * 1e-300);                // keep logs finite
    log_x_[i] = std::log(x);
    log_tail_[i] = std::log(t);
    prev = t;
  }
  tail_lo_ = std::exp(log_tail_.front());
  tail_hi_ = std::exp(log_tail_.back());
}

double LevyTailTable::tail(double x) const {
  if (x < 0.0) throw std::invalid_argument("LevyTailTable: negative x");
  if (x <= x_lo_) return rate_;  // flat extrapolation to the mass/truncation rate
  if (x >= x_hi_) {
    // extend with the last log-log slope (exponential-ish tails stay conservative)
    const std::size_t n = log_x_.size();
    const double slope =
        (log_tail_[n - 1] - log_tail_[n - 2]) / (log_x_[n - 1] - log_x_[n - 2]);
    return std::exp(log_tail_[n - 1] + slope * (std::log(x) - log_x_[n - 1]));
  }
  const double lx = std::log(x);
  const auto it = std::upper_bound(log_x_.begin(), log_x_.end(), lx);
  const std::size_t i = std::max<std::ptrdiff_t>(1, it - log_x_.begin()) - 1;
  const double w = (lx - log_x_[i]) / (log_x_[i + 1] - log_x_[i]);
  return std::exp(log_tail_[i] + w * (log_tail_[i + 1] - log_tail_[i]));
}

double LevyTailTable::sample_jump(RngStream& rng) const {
  const double target = std::log(rate_ * rng.uniform());
  // tail values decrease along the grid; find x with log nu_bar(x) = target
  if (target >= log_tail_.front()) return x_lo_;
  if (target <= log_tail_.back()) return x_hi_;
  // binary search over the decreasing log_tail_
  std::size_t lo = 0, hi = log_tail_.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (log_tail_[mid] > target) lo = mid;
    else hi = mid;
  }
  const double w = (target - log_tail_[lo]) / (log_tail_[hi] - log_tail_[lo]);
  return std::exp(log_x_[lo] + w * (log_x_[hi] - log_x_[lo]));
}

double LimitSampler::auto_eps(const CumulantSolver& s, ExtReal lam, double bias_budget) {
  if (levy_total_mass(s, lam).is_finite()) return 0.0;
  // int_0^eps u nu(du) = -eps nu_bar(eps) + int_0^eps nu_bar(u) du, shrink
  // eps until this dropped drift fits the budget.
  double eps = 0.05;
  for (int it = 0; it < 30; ++it) {
    const double tail_eps = levy_tail(s, lam, eps);
    const double integral = detail::integrate_to_zero(
        [&](double u) { return levy_tail(s, lam, u); }, eps, 1e-6 * bias_budget, 1e-4);
    const double dropped = integral - eps * tail_eps;
    if (dropped <= bias_budget) return eps;
    eps *= 0.5;
  }
  return eps;
}

LimitSampler::LimitSampler(const CumulantSolver& s, ExtReal lam, double eps,
                           std::size_t table_points)
    : table_(s, lam, eps, table_points), truncated_mass_rate_(0.0) {
  if (eps > 0.0) {
    const double integral = detail::integrate_to_zero(
        [&](double u) { return levy_tail(s, lam, u); }, eps, 1e-10, 1e-4);
    truncated_mass_rate_ = std::max(0.0, integral - eps * table_.rate());
  }
}

SubordinatorPath LimitSampler::simulate(double y_max, RngStream& rng) const {
  if (!(y_max > 0.0)) throw std::invalid_argument("simulate: horizon must be positive");
  SubordinatorPath p;
  p.horizon = y_max;
  p.eps = table_.eps();
  p.rate = table_.rate();
  p.truncated_mass_rate = truncated_mass_rate_;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(table_.rate());
    if (t > y_max) break;
    p.jump_times.push_back(t);
    p.jump_sizes.push_back(table_.sample_jump(rng));
  }
  return p;
}

double LimitSampler::marginal(double y, RngStream& rng) const {
  if (y < 0.0) throw std::invalid_argument("marginal: negative time");
  const std::uint64_t n = rng.poisson(table_.rate() * y);
  double sum = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) sum += table_.sample_jump(rng);
  return sum;
}

double LimitSampler::first_passage(double x, RngStream& rng) const {
  if (!(x > 0.0)) throw std::invalid_argument("first_passage: x must be positive");
  double t = 0.0, w = 0.0;
  for (;;) {
    t += rng.exponential(table_.rate());
    w += table_.sample_jump(rng);
    if (w >= x) return t;
  }
}

SubordinatorPath simulate_W(const CumulantSolver& s, ExtReal lam, double y_max, double eps,
                            RngStream& rng) {
  return LimitSampler(s, lam, eps).simulate(y_max, rng);
}

double invert_W(const SubordinatorPath& p, double x) {
  if (x <= 0.0) return 0.0;
  double cum = 0.0;
  for (std::size_t i = 0; i < p.jump_sizes.size(); ++i) {
    cum += p.jump_sizes[i];
    if (cum >= x) return p.jump_times[i];
  }
  throw std::out_of_range("invert_W: horizon insufficient for requested level");
}

InversePartition ancestral_partition(const SubordinatorPath& p, double x_max) {
  if (!(x_max > 0.0)) throw std::invalid_argument("ancestral_partition: x_max must be positive");
  InversePartition part;
  part.finite_mass = p.eps == 0.0;
  part.eps = p.eps;
  part.boundaries.push_back(0.0);
  part.inverse_values.push_back(0.0);
  double cum = 0.0, prev_time = 0.0;
  for (std::size_t i = 0; i < p.jump_sizes.size(); ++i) {
    const double next = cum + p.jump_sizes[i];
    if (next > x_max) break;  // only complete families
    cum = next;
    part.boundaries.push_back(cum);
    part.lengths.push_back(p.jump_sizes[i]);
    part.ages.push_back(p.jump_times[i] - prev_time);
    part.inverse_values.push_back(p.jump_times[i]);
    prev_time = p.jump_times[i];
  }
  return part;
}

double hausdorff_index(const BranchingMechanism& m) {
  const ExtReal d = m.psi_prime_inf();
  if (d.is_infinite()) return 0.0;
  return m.gamma() / d.value();
}

BoxCountEstimate box_count_estimate(const SubordinatorPath& p, double x_max,
                                    std::span<const double> scales) {
  if (scales.size() < 2) throw std::invalid_argument("box_count_estimate: need >= 2 scales");
  // The closure of the range of W is {0} plus the partial sums of jumps.
  std::vector<double> pts{0.0};
  double cum = 0.0;
  for (double j : p.jump_sizes) {
    cum += j;
    if (cum > x_max) break;
    pts.push_back(cum);
  }
  BoxCountEstimate est;
  est.scales.assign(scales.begin(), scales.end());
  for (double s : scales) {
    if (!(s > 0.0)) throw std::invalid_argument("box_count_estimate: scales must be positive");
    std::size_t count = 0;
    long long last = -1;
    for (double x : pts) {
      const long long box = static_cast<long long>(std::floor(x / s));
      if (box != last) {
        ++count;
        last = box;
      }
    }
    est.counts.push_back(count);
  }
  // Least squares of log N on log(1/s), restricted to the scaling window:
  // coarse scales still feel the largest jumps (local slope near 1), scales
  // near the truncation resolution saturate at the point count.
  const double n_pts = static_cast<double>(pts.size());
  const auto fit = [&](double c_lo, double c_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < est.scales.size(); ++i) {
      const double c = static_cast<double>(est.counts[i]);
      if (c < c_lo || c > c_hi) continue;
      const double xi = std::log(1.0 / est.scales[i]);
      const double yi = std::log(c);
      sx += xi;
      sy += yi;
      sxx += xi * xi;
      sxy += xi * yi;
      ++used;
    }
    if (used < 2) return std::numeric_limits<double>::quiet_NaN();
    const double dn = static_cast<double>(used);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  };
  est.slope = fit(300.0, 0.2 * n_pts);
  if (std::isnan(est.slope)) est.slope = fit(30.0, 0.5 * n_pts);
  if (std::isnan(est.slope))
    throw std::invalid_argument("box_count_estimate: no usable scaling window");
  return est;
}

double family_speed(const InversePartition& part, std::size_t i, const CumulantSolver& s,
                    double t) {
  if (i == 0 || i >= part.inverse_values.size())
    throw std::invalid_argument("family_speed: family index out of range (1-based)");
  const ExtReal vi = s.v_inf(t);
  if (vi.is_infinite())
    throw std::domain_error("family_speed: requires Grey's condition (finite v_t(inf))");
  return part.inverse_values[i] / vi.value();
}

}  // namespace csbp

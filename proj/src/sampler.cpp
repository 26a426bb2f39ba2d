#include "csbp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "csbp/laplace.hpp"

namespace csbp {

double sample_stable_one_sided(double alpha, double scale, RngStream& rng) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("sample_stable_one_sided: alpha must be in (0,1)");
  if (!(scale > 0.0)) throw std::invalid_argument("sample_stable_one_sided: scale must be > 0");
  const double u = M_PI * rng.uniform();
  const double e = rng.exponential();
  const double log_a = (alpha / (1.0 - alpha)) * std::log(std::sin(alpha * u)) +
                       std::log(std::sin((1.0 - alpha) * u)) -
                       (1.0 / (1.0 - alpha)) * std::log(std::sin(u));
  const double log_s = ((1.0 - alpha) / alpha) * (log_a - std::log(e));
  return std::exp(std::log(scale) / alpha + log_s);  // may overflow to inf: genuine heavy tail
}

double sample_compound_poisson(double rate, const std::function<double(RngStream&)>& jump,
                               RngStream& rng) {
  if (rate < 0.0) throw std::invalid_argument("sample_compound_poisson: negative rate");
  const std::uint64_t n = rng.poisson(rate);
  double sum = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) sum += jump(rng);
  return sum;
}

namespace {
constexpr double kNeveuChunk = 0.1;  // rejection acceptance e^{-chunk}
// Beyond this mass the chunk count makes rejection slower than a table
// lookup; the cutover matters in long-horizon inverse-flow sweeps where
// cell masses scale like e^{gamma t}.
constexpr double kNeveuTiltedMassCap = 64.0;
}  // namespace

MarginalSampler::MarginalSampler(const CumulantSolver& s, double t, MarginalMethod method)
    : solver_(&s), t_(t), method_(method) {
  if (!(t > 0.0)) throw std::invalid_argument("MarginalSampler: t must be positive");
  const auto& m = s.mechanism();
  if (method_ == MarginalMethod::auto_select) {
    if (m.is_feller()) method_ = MarginalMethod::feller_exact;
    else if (m.is_neveu()) method_ = MarginalMethod::neveu_tilted_stable;
    else method_ = MarginalMethod::generic_cdf_inversion;
  }
  if (method_ == MarginalMethod::feller_exact && !m.is_feller())
    throw std::invalid_argument("MarginalSampler: feller_exact needs pi = 0");
  if (method_ == MarginalMethod::neveu_tilted_stable && !m.is_neveu())
    throw std::invalid_argument("MarginalSampler: neveu_tilted_stable needs the Neveu mechanism");
  if (const auto* ts = std::get_if<TemperedStable>(&m.levy()); ts && ts->tempering == 0.0)
    throw std::invalid_argument(
        "MarginalSampler: untempered stable mechanisms are analytic-layer only");

  grey_ = m.grey_holds();
  if (grey_) v_inf_ = s.v_inf(t).value();
  if (method_ == MarginalMethod::feller_exact)
    feller_jump_rate_ = v_inf_ * std::exp(m.gamma() * t);
  beta_ = std::exp(-m.gamma() * t);
}

double MarginalSampler::extinction_probability(double x) const {
  if (!grey_) return 0.0;
  return std::exp(-x * v_inf_);
}

double MarginalSampler::sample(double x, RngStream& rng) const {
  if (!(x > 0.0)) throw std::invalid_argument("MarginalSampler: initial mass must be positive");
  switch (method_) {
    case MarginalMethod::feller_exact:
      return sample_feller(x, rng);
    case MarginalMethod::neveu_tilted_stable:
      return x <= kNeveuTiltedMassCap ? sample_neveu(x, rng) : sample_generic(x, rng);
    default:
      return sample_generic(x, rng);
  }
}

double MarginalSampler::sample_feller(double x, RngStream& rng) const {
  const std::uint64_t n = rng.poisson(x * v_inf_);
  if (n == 0) return 0.0;
  if (n <= 16) {
    double sum = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) sum += rng.exponential();
    return sum / feller_jump_rate_;
  }
  return rng.gamma(static_cast<double>(n)) / feller_jump_rate_;
}

double MarginalSampler::sample_neveu(double x, RngStream& rng) const {
  double total = 0.0;
  double remaining = x;
  while (remaining > 0.0) {
    const double chunk = std::min(remaining, kNeveuChunk);
    remaining -= chunk;
    for (;;) {
      const double s = sample_stable_one_sided(beta_, chunk, rng);
      if (rng.uniform() < std::exp(-s)) {
        total += s;
        break;
      }
    }
  }
  return total;
}

double MarginalSampler::CdfTable::sample(RngStream& rng) const {
  const double u = rng.uniform();
  if (u <= cdf.front()) return 0.0;  // atom plus sub-grid mass (numerically zero draws)
  if (u >= cdf.back()) return z.back();
  std::size_t lo = 0, hi = cdf.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (cdf[mid] < u) lo = mid;
    else hi = mid;
  }
  if (cdf[hi] <= cdf[lo]) return z[hi];
  const double w = (u - cdf[lo]) / (cdf[hi] - cdf[lo]);
  return z[lo] + w * (z[hi] - z[lo]);
}

const MarginalSampler::CdfTable& MarginalSampler::table_for_mass(double x) const {
  {
    std::lock_guard<std::mutex> lock(table_mutex_);
    auto it = tables_.find(x);
    if (it != tables_.end()) return *it->second;
  }
  // Build outside the lock; duplicate work on a race is harmless.
  auto table = std::make_shared<CdfTable>();
  table->atom_at_zero = extinction_probability(x);

  // The cumulant is evaluated tens of thousands of times along a slowly
  // moving argument; warm-starting the root-polish from the previous value
  // drops the per-call cost by an order of magnitude.
  struct Warm {
    double q = -1.0, v = -1.0;
  };
  auto warm = std::make_shared<Warm>();
  TransformFn transform;
  transform.eval = [this, x, warm](double q) {
    const double guess = warm->q > 0.0 ? warm->v * std::min(1.0, q / warm->q) : -1.0;
    const double v = guess > 0.0 ? solver_->v(t_, q, guess) : solver_->v(t_, q);
    warm->q = q;
    warm->v = v;
    return std::exp(-x * v) / q;
  };
  InversionOptions opts;
  opts.gs_order = 14;
  opts.rel_tol = 5e-3;
  opts.abs_tol = 1e-5;
  opts.allow_talbot = false;
  opts.best_effort = true;

  const double mean = x * beta_;
  const auto cdf_at = [&](double z) {
    return std::clamp(invert_to_function(transform, z, InversionKind::mass_function, opts), 0.0,
                      1.0);
  };
  double z_hi = mean;
  for (int it = 0; it < 200 && 1.0 - cdf_at(z_hi) > 1e-7; ++it) z_hi *= 2.0;
  const double z_lo = mean * 1e-7;

  constexpr std::size_t kPoints = 4096;
  table->z.resize(kPoints);
  table->cdf.resize(kPoints);
  const double la = std::log(z_lo), lb = std::log(z_hi);
  for (std::size_t j = 0; j < kPoints; ++j) {
    const double zj = std::exp(la + (lb - la) * j / (kPoints - 1.0));
    table->z[j] = zj;
    table->cdf[j] = cdf_at(zj);
  }
  // Isotonic regression (pool adjacent violators) instead of a running max:
  // a running max rectifies the alternating inversion noise upward and
  // biases the sampled quantiles small.
  {
    auto& c = table->cdf;
    std::vector<double> level(c.size()), weight(c.size());
    std::vector<std::size_t> count(c.size());
    std::size_t m = 0;
    for (std::size_t j = 0; j < c.size(); ++j) {
      level[m] = c[j];
      weight[m] = 1.0;
      count[m] = 1;
      ++m;
      while (m > 1 && level[m - 2] > level[m - 1]) {
        const double w = weight[m - 2] + weight[m - 1];
        level[m - 2] = (level[m - 2] * weight[m - 2] + level[m - 1] * weight[m - 1]) / w;
        weight[m - 2] = w;
        count[m - 2] += count[m - 1];
        --m;
      }
    }
    std::size_t j = 0;
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t k = 0; k < count[b]; ++k) c[j++] = level[b];
  }
  if (table->cdf.back() < 0.99)
    throw std::runtime_error(
        "MarginalSampler: CDF inversion failed to cover the law for this mechanism");

  std::lock_guard<std::mutex> lock(table_mutex_);
  auto [it2, inserted] = tables_.emplace(x, std::move(table));
  return *it2->second;
}

double MarginalSampler::sample_generic(double x, RngStream& rng) const {
  return table_for_mass(x).sample(rng);
}

double MonotonePath::value_at(double y) const {
  if (y < positions.front()) return 0.0;
  const auto it = std::upper_bound(positions.begin(), positions.end(), y);
  return values[(it - positions.begin()) - 1];
}

MonotonePath sample_increment_grid(const MarginalSampler& ms, std::span<const double> x_grid,
                                   RngStream& rng) {
  if (x_grid.empty()) throw std::invalid_argument("sample_increment_grid: empty grid");
  if (!(x_grid[0] > 0.0))
    throw std::invalid_argument("sample_increment_grid: grid must start above 0");
  for (std::size_t i = 1; i < x_grid.size(); ++i)
    if (!(x_grid[i] > x_grid[i - 1]))
      throw std::invalid_argument("sample_increment_grid: grid must be strictly ascending");

  MonotonePath p;
  p.positions.reserve(x_grid.size() + 1);
  p.values.reserve(x_grid.size() + 1);
  p.positions.push_back(0.0);
  p.values.push_back(0.0);
  double prev_x = 0.0, acc = 0.0;
  for (double xi : x_grid) {
    acc += ms.sample(xi - prev_x, rng);
    p.positions.push_back(xi);
    p.values.push_back(acc);
    p.resolution = std::max(p.resolution, xi - prev_x);
    prev_x = xi;
  }
  return p;
}

}  // namespace csbp

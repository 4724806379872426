#include "penalise/wiener.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "penalise/parallel.hpp"

namespace penalise {

namespace {

const double kBesselDrift = std::sqrt(2.0 / std::numbers::pi);

// Walks a grid cursor forward; values at non-node times are interpolated.
class PathReader {
 public:
  explicit PathReader(const SamplePath& path) : path_(path), times_(path.grid.times()) {}

  double at(double t) {
    while (i_ < times_.size() && times_[i_] < t) ++i_;
    if (times_[i_] == t) return path_.values[i_];
    aligned_ = false;
    const double w = (t - times_[i_ - 1]) / (times_[i_] - times_[i_ - 1]);
    return path_.values[i_ - 1] + w * (path_.values[i_] - path_.values[i_ - 1]);
  }
  bool aligned() const { return aligned_; }

 private:
  const SamplePath& path_;
  std::span<const double> times_;
  std::size_t i_ = 0;
  bool aligned_ = true;
};

void require_within(const StepFunction& f, const SamplePath& path) {
  if (path.grid.empty()) throw std::invalid_argument("stieltjes: empty path");
  if (f.support_end() > path.span())
    throw std::invalid_argument("stieltjes: integrand support exceeds the path span");
}

}  // namespace

IntegralValue stieltjes(const StepFunction& f, const SamplePath& path) {
  require_within(f, path);
  PathReader reader(path);
  const auto ends = f.right_ends();
  const auto levels = f.levels();
  double sum = 0.0;
  double prev = path.values.front();
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double x = reader.at(ends[k]);
    sum += levels[k] * (x - prev);
    prev = x;
  }
  return {sum, path.grid.dt(), reader.aligned()};
}

double stieltjes_scale(const StepFunction& f, const SamplePath& path) {
  require_within(f, path);
  PathReader reader(path);
  const auto ends = f.right_ends();
  const auto levels = f.levels();
  double scale = 0.0;
  double prev = path.values.front();
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double x = reader.at(ends[k]);
    scale += std::abs(levels[k]) * (std::abs(x) + std::abs(prev));
    prev = x;
  }
  return scale;
}

BridgeIntegral bridge_integral(const StepFunction& f, double u, const BridgeSample& bridge) {
  BridgeIntegral out;
  const StepFunction head = truncate(f, u);
  out.value = stieltjes(head, bridge.path);
  if (bridge.driver.grid.empty()) return out;
  out.identity_checked = true;
  out.via_driver = stieltjes(project_bridge(f, u), bridge.driver).value;
  const double scale = stieltjes_scale(head, bridge.path) + stieltjes_scale(head, bridge.driver);
  out.residual = std::abs(out.value.value - out.via_driver) / (1.0 + scale);
  if (out.residual > 1e-10) throw std::logic_error("bridge_integral: identity residual too large");
  return out;
}

IntegralValue bessel_integral_centered(const StepFunction& f, const SamplePath& bessel) {
  IntegralValue v = stieltjes(f, bessel);
  v.value -= kBesselDrift * f.sqrt_weighted_integral();
  return v;
}

Decomposition decompose_integral(const StepFunction& f, const TiltedSample& s) {
  Decomposition d;
  d.whole = stieltjes(f, s.full);
  d.j1 = stieltjes(truncate(f, s.u), s.bridge.path);
  d.j2 = stieltjes(shift(f, s.u), s.tail);
  d.scale = stieltjes_scale(f, s.full);
  return d;
}

std::vector<IntegralValue> partial_integrals(const StepFunction& f, const TiltedSample& s,
                                             const TimeGrid& t_grid) {
  if (t_grid.span() > s.horizon)
    throw std::invalid_argument("partial_integrals: t grid beyond the horizon");
  std::vector<IntegralValue> out;
  out.reserve(t_grid.size());
  for (double t : t_grid.times()) {
    const auto d = decompose_integral(truncate(f, t), s);
    out.push_back({d.j1.value + d.j2.value, d.whole.grid_dt, d.j1.aligned && d.j2.aligned});
  }
  return out;
}

double centered_tail_integral(const StepFunction& f, const TiltedSample& s) {
  return bessel_integral_centered(shift(f, s.u), s.bessel).value;
}

HolderMoment holder_increment_moment(const StepFunction& f, const numerics::TiltingConfig& tilt,
                                     double v1, double v2, const MonteCarloOptions& opts) {
  if (!(v1 >= 0.0) || !(v2 >= v1))
    throw std::invalid_argument("holder_increment_moment: requires 0 <= v1 <= v2");
  HolderMoment h;
  h.t1 = time_change_L(f, v1);
  h.t2 = time_change_L(f, v2);
  h.energy = f.energy_until(h.t2) - f.energy_until(h.t1);
  h.bound_time = 3.0 * (v2 - v1) * (v2 - v1);
  h.bound_energy_squared = 3.0 * h.energy * h.energy;
  h.bound_energy = 3.0 * h.energy;
  h.bound_max = std::max(h.bound_energy, h.bound_energy_squared);

  const StepFunction increment = (truncate(f, h.t2) - truncate(f, h.t1)).normalized();
  if (increment.empty()) {
    for (std::size_t i = 0; i < std::max<std::size_t>(opts.n_paths, 2); ++i) h.fourth.add(0.0);
    return h;
  }
  if (increment.support_end() > opts.horizon)
    throw std::invalid_argument("holder_increment_moment: integrand beyond the horizon");

  TimeGrid grid = opts.nodes;
  if (grid.empty()) {
    std::set<double> times{0.0, opts.horizon};
    for (double t : increment.right_ends()) times.insert(t);
    times.insert(h.t1);
    grid = TimeGrid::from_times({times.begin(), times.end()});
  }
  h.fourth = run_chunked<Estimate>(
      opts.n_paths, opts.workers, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        RandomStream rng({opts.seed, opts.stream_base + chunk});
        Estimate e;
        for (std::size_t i = begin; i < end; ++i) {
          const auto s = sample_tilted(tilt, opts.horizon, grid, rng, opts.tail_times);
          const double j = centered_tail_integral(increment, s);
          e.add(j * j * j * j);
        }
        return e;
      });
  return h;
}

}  // namespace penalise

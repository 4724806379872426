#include "penalise/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "penalise/parallel.hpp"

namespace penalise {

using numerics::TiltingConfig;

double truncation_mass(const TiltingConfig& tilt, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("truncation_mass: horizon must be positive");
  if (tilt.exponential) return std::erfc(std::sqrt(horizon));
  numerics::Integrand1D g{[&](double u) { return tilt.phi(u) / std::sqrt(u); }, {}, {}};
  const double inside = numerics::integrate_singular(g, 0.0, horizon, true, false);
  return std::max(0.0, 1.0 - inside / tilt.c_phi);
}

double sample_last_exit(const TiltingConfig& tilt, double horizon, RandomStream& rng) {
  if (!(tilt.c_phi > 0.0)) throw std::invalid_argument("sample_last_exit: inadmissible tilt");
  for (;;) {
    const double z = rng.gaussian();
    const double u = 0.5 * z * z;
    if (!(u > 0.0) || u > horizon) continue;
    if (tilt.exponential) return u;
    if (rng.uniform() * tilt.envelope <= tilt.phi(u) * std::exp(u)) return u;
  }
}

TiltedSample sample_tilted(const TiltingConfig& tilt, double horizon, const TimeGrid& nodes,
                           RandomStream& rng, std::span<const double> tail_times) {
  if (nodes.empty() || std::abs(nodes.span() - horizon) > 1e-12 * horizon)
    throw std::invalid_argument("sample_tilted: grid must end at the horizon");

  TiltedSample s;
  s.horizon = horizon;
  s.u = sample_last_exit(tilt, horizon, rng);
  const double u = s.u;
  const auto g = nodes.times();

  std::vector<double> head_times;
  std::size_t k = 0;
  for (; k < g.size() && g[k] < u; ++k) head_times.push_back(g[k]);
  head_times.push_back(u);
  if (k < g.size() && g[k] == u) ++k;

  // (tail clock, full clock) pairs after u
  std::vector<std::pair<double, double>> after;
  for (std::size_t j = k; j < g.size(); ++j) after.emplace_back(g[j] - u, g[j]);
  if (!tail_times.empty()) {
    for (double tau : tail_times) {
      if (!(tau > 0.0) || u + tau > horizon) continue;
      after.emplace_back(tau, u + tau);
    }
    std::sort(after.begin(), after.end());
    std::vector<std::pair<double, double>> kept;
    for (const auto& p : after)
      if (kept.empty() || p.first - kept.back().first > 1e-12 * (1.0 + p.first)) kept.push_back(p);
    after = std::move(kept);
  }

  std::vector<double> tail_grid{0.0};
  std::vector<double> full_times(head_times);
  for (const auto& [tau, t] : after) {
    tail_grid.push_back(tau);
    full_times.push_back(t);
  }

  s.bridge = sample_bridge(u, TimeGrid::from_times(std::move(head_times)), rng);
  s.bessel = sample_bessel3(TimeGrid::from_times(std::move(tail_grid)), rng);
  s.sign = rng.sign();
  s.tail = symmetrize(s.bessel, s.sign);

  s.full.values = s.bridge.path.values;
  s.full.values.insert(s.full.values.end(), s.tail.values.begin() + 1, s.tail.values.end());
  s.full.grid = TimeGrid::from_times(std::move(full_times));
  return s;
}

TiltedSample sample_tilted(const TiltingConfig& tilt, double horizon, double dt, SeedSpec seed) {
  RandomStream rng(seed);
  return sample_tilted(tilt, horizon, TimeGrid::uniform(horizon, dt), rng);
}

TimeGrid MonteCarloOptions::grid() const {
  if (!nodes.empty()) return nodes;
  return TimeGrid::uniform(horizon, dt);
}

namespace {

struct CountedEstimate {
  Estimate estimate;
  std::uint64_t non_finite = 0;

  void merge(const CountedEstimate& other) {
    estimate.merge(other.estimate);
    non_finite += other.non_finite;
  }
};

void require_options(const MonteCarloOptions& opts) {
  if (opts.n_paths < 2) throw std::invalid_argument("n_paths must be at least 2");
  if (!(opts.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
}

}  // namespace

WEstimate w_expectation(const PathFunctional& F, const TiltingConfig& tilt,
                        const MonteCarloOptions& opts) {
  require_options(opts);
  const TimeGrid grid = opts.grid();
  auto acc = run_chunked<CountedEstimate>(
      opts.n_paths, opts.workers, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        RandomStream rng({opts.seed, opts.stream_base + chunk});
        CountedEstimate out;
        for (std::size_t i = begin; i < end; ++i) {
          const double x = F(sample_tilted(tilt, opts.horizon, grid, rng, opts.tail_times));
          if (std::isfinite(x))
            out.estimate.add(x);
          else
            ++out.non_finite;
        }
        return out;
      });
  if (static_cast<double>(acc.non_finite) > 1e-3 * static_cast<double>(opts.n_paths))
    throw std::runtime_error("w_expectation: too many non-finite evaluations (" +
                             std::to_string(acc.non_finite) + ")");
  WEstimate out;
  out.estimate = acc.estimate;
  out.non_finite = acc.non_finite;
  out.truncation_mass = truncation_mass(tilt, opts.horizon);
  out.w_scale = tilt.c_phi / std::sqrt(2.0 * std::numbers::pi);
  return out;
}

WGEstimate wG_probability(const std::function<bool(const TiltedSample&)>& event,
                          const PathFunctional& G, const TiltingConfig& tilt,
                          const MonteCarloOptions& opts) {
  require_options(opts);
  const TimeGrid grid = opts.grid();
  WGEstimate out;
  out.ratio = run_chunked<RatioEstimate>(
      opts.n_paths, opts.workers, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        RandomStream rng({opts.seed, opts.stream_base + chunk});
        RatioEstimate r;
        for (std::size_t i = begin; i < end; ++i) {
          const auto s = sample_tilted(tilt, opts.horizon, grid, rng, opts.tail_times);
          const double w = G(s) / tilt.phi(s.u);
          r.add(event(s) ? w : 0.0, w);
        }
        return r;
      });
  const double se = out.ratio.denominator_stderr();
  if (!(std::abs(out.ratio.denominator_mean()) > 3.0 * se))
    throw std::runtime_error("weight degenerate");
  return out;
}

double lambda_tail_closed(double x, double T) {
  return std::exp(-T) * std::exp(-std::numbers::sqrt2 * std::abs(x)) / std::numbers::sqrt2;
}

double lambda_tail_quadrature(double x, double T) {
  const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  numerics::Integrand1D g{
      [=](double u) { return c * std::exp(-(T + u) - x * x / (2.0 * u)) / std::sqrt(u); }, {}, {}};
  return numerics::integrate_half_line(g, true).value;
}

double lambda_T(double x_T, double g_T, double T) {
  return std::abs(x_T) * std::exp(-g_T) + lambda_tail_closed(x_T, T);
}

double lambda_T(const SamplePath& path, double T) {
  const auto index = path.grid.find(T);
  if (!index) throw std::invalid_argument("lambda_T: T must be a grid node");
  return lambda_T(path.values[*index], last_exit(path, T), T);
}

}  // namespace penalise

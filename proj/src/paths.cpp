#include "penalise/paths.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace penalise {

TimeGrid TimeGrid::uniform(double span, double dt) {
  if (!(span > 0.0) || !(dt > 0.0) || !std::isfinite(span))
    throw std::invalid_argument("TimeGrid::uniform: span and dt must be positive");
  const double steps = span / dt;
  auto n = static_cast<std::size_t>(std::floor(steps + 1e-9));
  TimeGrid grid;
  grid.times_.reserve(n + 2);
  for (std::size_t k = 0; k <= n; ++k) grid.times_.push_back(static_cast<double>(k) * dt);
  if (grid.times_.back() < span * (1.0 - 1e-12))
    grid.times_.push_back(span);
  else
    grid.times_.back() = span;
  grid.dt_ = dt;
  return grid;
}

TimeGrid TimeGrid::from_times(std::vector<double> times) {
  if (times.empty()) throw std::invalid_argument("TimeGrid: empty grid");
  if (times.front() != 0.0) throw std::invalid_argument("TimeGrid: must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!std::isfinite(times[i]) || !(times[i] > times[i - 1]))
      throw std::invalid_argument("TimeGrid: times must be strictly increasing");
  TimeGrid grid;
  grid.times_ = std::move(times);
  return grid;
}

std::optional<std::size_t> TimeGrid::find(double t) const {
  const auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.end() || *it != t) return std::nullopt;
  return static_cast<std::size_t>(it - times_.begin());
}

TimeGrid TimeGrid::with_node(double t) const {
  if (find(t)) return *this;
  if (!(t > 0.0)) throw std::invalid_argument("TimeGrid::with_node: node must be positive");
  std::vector<double> times(times_);
  times.insert(std::upper_bound(times.begin(), times.end(), t), t);
  return from_times(std::move(times));
}

double SamplePath::value_at(double t) const {
  const auto times = grid.times();
  if (times.empty() || t < 0.0 || t > times.back())
    throw std::invalid_argument("SamplePath::value_at: time outside the path span");
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  const auto i = static_cast<std::size_t>(it - times.begin());
  if (*it == t) return values[i];
  const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
  return values[i - 1] + w * (values[i] - values[i - 1]);
}

namespace {

void require_grid(const TimeGrid& grid) {
  if (grid.empty()) throw std::invalid_argument("empty grid");
}

void fill_bm(std::span<const double> times, std::span<double> out, RandomStream& rng) {
  out[0] = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k)
    out[k] = out[k - 1] + std::sqrt(times[k] - times[k - 1]) * rng.gaussian();
}

}  // namespace

SamplePath sample_bm(const TimeGrid& grid, RandomStream& rng) {
  require_grid(grid);
  SamplePath path{grid, std::vector<double>(grid.size())};
  fill_bm(grid.times(), path.values, rng);
  return path;
}

SamplePath sample_bm(const TimeGrid& grid, SeedSpec seed) {
  RandomStream rng(seed);
  return sample_bm(grid, rng);
}

BridgeSample sample_bridge(double u, const TimeGrid& grid, RandomStream& rng) {
  require_grid(grid);
  if (!(u > 0.0)) throw std::invalid_argument("sample_bridge: requires u > 0");
  if (std::abs(grid.span() - u) > 1e-12 * u)
    throw std::invalid_argument("sample_bridge: grid must end at u");
  BridgeSample out;
  out.driver = sample_bm(grid, rng);
  const auto times = grid.times();
  const double end = out.driver.terminal();
  out.path.grid = grid;
  out.path.values.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    out.path.values[k] = out.driver.values[k] - (times[k] / u) * end;
  out.path.values.back() = 0.0;
  return out;
}

BridgeSample sample_bridge(double u, const TimeGrid& grid, SeedSpec seed) {
  RandomStream rng(seed);
  return sample_bridge(u, grid, rng);
}

SamplePath sample_bessel3(const TimeGrid& grid, RandomStream& rng) {
  require_grid(grid);
  const auto times = grid.times();
  SamplePath path{grid, std::vector<double>(grid.size(), 0.0)};
  double x = 0.0, y = 0.0, z = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double sd = std::sqrt(times[k] - times[k - 1]);
    x += sd * rng.gaussian();
    y += sd * rng.gaussian();
    z += sd * rng.gaussian();
    path.values[k] = std::sqrt(x * x + y * y + z * z);
  }
  return path;
}

SamplePath sample_bessel3(const TimeGrid& grid, SeedSpec seed) {
  RandomStream rng(seed);
  return sample_bessel3(grid, rng);
}

SamplePath symmetrize(const SamplePath& path, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("symmetrize: sign must be +1 or -1");
  SamplePath out = path;
  if (sign == -1)
    for (double& v : out.values) v = -v;
  return out;
}

SamplePath concat(const SamplePath& head, const SamplePath& tail) {
  if (head.grid.empty() || tail.grid.empty()) throw std::invalid_argument("concat: empty path");
  const double u = head.span();
  const double at_u = head.terminal();
  const bool matching = at_u == tail.values.front();
  std::vector<double> times(head.grid.times().begin(), head.grid.times().end());
  std::vector<double> values(head.values);
  for (std::size_t k = 1; k < tail.size(); ++k) {
    times.push_back(u + tail.grid[k]);
    values.push_back(matching ? tail.values[k] : at_u);
  }
  return {TimeGrid::from_times(std::move(times)), std::move(values)};
}

SamplePath shift_path(const SamplePath& path, double u) {
  const auto index = path.grid.find(u);
  if (!index) throw std::invalid_argument("shift_path: u must be a grid node within the span");
  std::vector<double> times;
  std::vector<double> values;
  times.reserve(path.size() - *index);
  values.reserve(path.size() - *index);
  for (std::size_t k = *index; k < path.size(); ++k) {
    times.push_back(path.grid[k] - u);
    values.push_back(path.values[k]);
  }
  return {TimeGrid::from_times(std::move(times)), std::move(values)};
}

double last_exit(const SamplePath& path, double horizon) {
  const auto index = path.grid.find(horizon);
  if (!index) throw std::invalid_argument("last_exit: horizon must be a grid node");
  return last_exit(path.grid.times(), path.values, *index);
}

double last_exit(std::span<const double> times, std::span<const double> v,
                 std::size_t horizon_index) {
  if (horizon_index >= times.size() || times.size() != v.size())
    throw std::invalid_argument("last_exit: horizon index outside the path");
  for (std::size_t i = horizon_index; i >= 1; --i) {
    if (v[i] == 0.0) return times[i];
    if (v[i - 1] == 0.0) return times[i - 1];
    if ((v[i - 1] < 0.0) != (v[i] < 0.0))
      return times[i - 1] + (times[i] - times[i - 1]) * v[i - 1] / (v[i - 1] - v[i]);
  }
  return 0.0;
}

}  // namespace penalise

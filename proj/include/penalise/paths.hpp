#pragma once

#include <optional>
#include <span>
#include <vector>

#include "penalise/random.hpp"

namespace penalise {

/// Strictly increasing time mesh starting at 0.
class TimeGrid {
 public:
  TimeGrid() = default;

  /// Nodes k*dt for k = 0..n with n*dt = span (span is appended when dt does
  /// not divide it).
  static TimeGrid uniform(double span, double dt);
  /// Throws std::invalid_argument unless times is non-empty, starts at 0 and
  /// is strictly increasing and finite.
  static TimeGrid from_times(std::vector<double> times);

  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  double span() const { return times_.empty() ? 0.0 : times_.back(); }
  double operator[](std::size_t i) const { return times_[i]; }
  std::span<const double> times() const { return times_; }
  /// Step of a uniform grid, 0 for explicit grids.
  double dt() const { return dt_; }

  /// Index of the node equal to t, if any.
  std::optional<std::size_t> find(double t) const;
  /// Same grid with t inserted (no-op if already a node).
  TimeGrid with_node(double t) const;

 private:
  std::vector<double> times_;
  double dt_ = 0.0;
};

/// Values of a path on a grid, read piecewise-linearly between nodes.
struct SamplePath {
  TimeGrid grid;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double span() const { return grid.span(); }
  double terminal() const { return values.back(); }
  /// Linear interpolation; throws std::invalid_argument outside [0, span].
  double value_at(double t) const;
};

/// Brownian bridge of length u together with the Brownian motion B it was
/// built from: X_s = B_s - (s/u) B_u.
struct BridgeSample {
  SamplePath path;
  SamplePath driver;
};

SamplePath sample_bm(const TimeGrid& grid, RandomStream& rng);
SamplePath sample_bm(const TimeGrid& grid, SeedSpec seed);

/// Throws std::invalid_argument unless u > 0 and the grid spans exactly [0, u].
BridgeSample sample_bridge(double u, const TimeGrid& grid, RandomStream& rng);
BridgeSample sample_bridge(double u, const TimeGrid& grid, SeedSpec seed);

/// BES(3) from 0 as the Euclidean norm of a three-dimensional Brownian motion.
SamplePath sample_bessel3(const TimeGrid& grid, RandomStream& rng);
SamplePath sample_bessel3(const TimeGrid& grid, SeedSpec seed);

/// Multiplies the path by sign in {+1, -1}.
SamplePath symmetrize(const SamplePath& path, int sign);

/// head on [0, u) followed by tail shifted to start at u = head.span(). When
/// head(u) != tail(0) the result is frozen at head(u) after u.
SamplePath concat(const SamplePath& head, const SamplePath& tail);

/// s -> X_{u+s}; u must be a grid node.
SamplePath shift_path(const SamplePath& path, double u);

/// Zero of the linear interpolant in the last grid cell before `horizon`
/// whose end values change sign or touch zero; 0 if there is none. The
/// horizon must be a grid node.
double last_exit(const SamplePath& path, double horizon);
/// Same rule on raw node times and values, scanning back from node `horizon_index`.
double last_exit(std::span<const double> times, std::span<const double> values,
                 std::size_t horizon_index);

}  // namespace penalise

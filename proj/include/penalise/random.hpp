#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace penalise {

/// Identifies one reproducible random stream. Distinct (root_seed,
/// stream_index) pairs seed the generator through std::seed_seq and give
/// independent streams for all practical purposes.
struct SeedSpec {
  std::uint64_t root_seed = 0;
  std::uint64_t stream_index = 0;

  SeedSpec substream(std::uint64_t index) const { return {root_seed, stream_index + index}; }
};

class RandomStream {
 public:
  explicit RandomStream(SeedSpec seed);

  double gaussian() { return normal_(engine_); }
  /// Uniform on (0, 1).
  double uniform();
  /// +1 or -1 with probability 1/2 each.
  int sign() { return (engine_() >> 63) ? 1 : -1; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;  // ziggurat
};

}  // namespace penalise

#include "penalise/random.hpp"

namespace penalise {

RandomStream::RandomStream(SeedSpec seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed.root_seed),
                    static_cast<std::uint32_t>(seed.root_seed >> 32),
                    static_cast<std::uint32_t>(seed.stream_index),
                    static_cast<std::uint32_t>(seed.stream_index >> 32),
                    0x70656e61u};
  engine_.seed(seq);
}

double RandomStream::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace penalise

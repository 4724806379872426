#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace penalise {

/// Paths per random stream. Fixed so that results do not depend on the
/// number of workers.
inline constexpr std::size_t kChunkSize = 4096;

inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Splits [0, n) into chunks of kChunkSize, evaluates fn(chunk, begin, end)
/// on up to `workers` threads and merges the per-chunk accumulators in chunk
/// order, so the result is bit-identical for any worker count.
template <class Acc, class Fn>
Acc run_chunked(std::size_t n, unsigned workers, Fn fn) {
  const std::size_t chunks = (n + kChunkSize - 1) / kChunkSize;
  std::vector<Acc> partial(chunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      try {
        const std::size_t begin = c * kChunkSize;
        partial[c] = fn(c, begin, std::min(n, begin + kChunkSize));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(chunks)));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  Acc total{};
  for (auto& p : partial) total.merge(p);
  return total;
}

}  // namespace penalise

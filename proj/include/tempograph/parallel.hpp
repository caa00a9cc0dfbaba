#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tempograph {

/// Number of workers to use when the caller passes 0.
inline unsigned default_workers() {
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [0, n) into at most `workers` contiguous chunks and runs
/// fn(begin, end, chunk) on each. Chunk boundaries depend only on (n, workers).
/// The first exception thrown by any chunk is rethrown on the caller.
template <typename Fn>
void parallel_chunks(std::int64_t n, unsigned workers, Fn&& fn) {
  if (n <= 0) return;
  if (workers == 0) workers = default_workers();
  const auto chunks = static_cast<std::int64_t>(
      std::min<std::int64_t>(workers, n));
  if (chunks <= 1) {
    fn(std::int64_t{0}, n, std::int64_t{0});
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(chunks));
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::int64_t c = 0; c < chunks; ++c) {
    const std::int64_t begin = n * c / chunks;
    const std::int64_t end = n * (c + 1) / chunks;
    threads.emplace_back([&, begin, end, c] {
      try {
        fn(begin, end, c);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace tempograph

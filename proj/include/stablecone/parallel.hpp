#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace stablecone {

// Path-index ranges are cut at fixed multiples of this size regardless of
// the worker count; per-chunk results are merged in chunk order.
inline constexpr std::int64_t kPathChunk = 2048;

int resolve_threads(int requested);

// Calls fn(begin, end) for each chunk of [0, n_items) and returns the chunk
// results in index order. The first exception thrown by a worker is rethrown.
template <class Result, class Fn>
std::vector<Result> parallel_chunks(std::int64_t n_items, int threads, Fn&& fn,
                                    std::int64_t chunk = kPathChunk) {
  const std::int64_t n_chunks = n_items <= 0 ? 0 : (n_items + chunk - 1) / chunk;
  std::vector<Result> results(static_cast<std::size_t>(n_chunks));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::int64_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        const std::int64_t begin = c * chunk;
        const std::int64_t end = std::min(n_items, begin + chunk);
        results[static_cast<std::size_t>(c)] = fn(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_chunks);
        return;
      }
    }
  };
  const int n_workers =
      static_cast<int>(std::min<std::int64_t>(resolve_threads(threads), std::max<std::int64_t>(n_chunks, 1)));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace stablecone

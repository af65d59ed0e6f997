#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace roughflow {

/// Number of worker threads implied by a request: n <= 0 means "use hardware".
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Static-partition parallel loop over [0, n). Each worker owns one contiguous
/// chunk, so results are independent of the thread count as long as the body
/// writes only to indices it owns and performs no cross-chunk reductions.
inline void parallel_for(std::int64_t n, int threads,
                         const std::function<void(std::int64_t, std::int64_t)>& body) {
  if (n <= 0) return;
  int workers = resolve_threads(threads);
  if (workers > n) workers = static_cast<int>(n);
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::int64_t lo = w * chunk;
    std::int64_t hi = lo + chunk < n ? lo + chunk : n;
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace roughflow

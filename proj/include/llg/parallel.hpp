#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace llg {

/// Runs body(begin, end) over a partition of [0, n) into contiguous bands,
/// one band per worker. Bands write disjoint output ranges, so results are
/// identical for any thread count; reductions stay out of this helper.
inline void parallel_for(int n, int threads,
                         const std::function<void(int, int)>& body) {
  if (n <= 0) return;
  if (threads <= 1 || n < 4 * threads) {
    body(0, n);
    return;
  }
  const int bands = threads;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(bands - 1));
  const int chunk = (n + bands - 1) / bands;
  for (int b = 1; b < bands; ++b) {
    const int begin = b * chunk;
    const int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(body, begin, end);
  }
  body(0, std::min(n, chunk));
  for (auto& th : pool) th.join();
}

inline int clamp_threads(int requested) {
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int cap = hw > 0 ? hw : 1;
  if (requested < 1) return 1;
  return requested > cap ? cap : requested;
}

}  // namespace llg

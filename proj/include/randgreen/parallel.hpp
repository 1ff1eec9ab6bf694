#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace randgreen {

inline int worker_count() {
  if (const char* env = std::getenv("RANDGREEN_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : int(hc);
}

// Runs fn(i) for i in [0, n).  Work is claimed by atomic chunks; fn must be
// deterministic given i alone (per-index RNG streams), so the outcome is
// independent of the worker count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         std::size_t chunk = 64) {
  const int workers = worker_count();
  if (workers <= 1 || n < 2 * chunk) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(chunk);
      if (begin >= n) return;
      const std::size_t end = std::min(begin + chunk, n);
      for (std::size_t i = begin; i < end; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
}

// Deterministic reduction: fixed-shape pairwise tree, independent of thread
// scheduling and insensitive to accumulation-order drift.
inline double pairwise_sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

}  // namespace randgreen

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace entroreg {

// Thread budget for data-parallel maps, read once from ENTROREG_THREADS.
// 0 (or unset, or garbage) means auto = hardware concurrency.
inline unsigned thread_budget() {
  static const unsigned budget = [] {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const char* s = std::getenv("ENTROREG_THREADS");
    if (!s || !*s) return hw;
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0' || v < 0) return hw;
    return v == 0 ? hw : (unsigned)v;
  }();
  return budget;
}

// fn(i) for i in [0, n), split into one contiguous chunk per worker. Only for
// loops whose iterations write disjoint slots; results are then independent of
// the thread count. Reductions stay sequential elsewhere on purpose.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
  const unsigned budget = thread_budget();
  if (budget <= 1 || n < 2048) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned workers = (unsigned)std::min<std::size_t>(budget, n);
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = (std::size_t)w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace entroreg

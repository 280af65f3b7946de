#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace mvfund {

/// Worker count: MVFUND_THREADS when set (clamped to >= 1), else 1.
inline int worker_count() {
  if (const char* env = std::getenv("MVFUND_THREADS")) {
    const int n = std::atoi(env);
    if (n > 1) return n;
  }
  return 1;
}

/// Index-parallel loop over [0, count). Results are deterministic under any
/// schedule as long as `fn` writes only to slot i.
template <typename Fn>
void parallel_for(size_t count, Fn&& fn) {
  const int workers = worker_count();
  if (workers <= 1 || count < 2) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const size_t chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const size_t begin = w * chunk;
    const size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace mvfund

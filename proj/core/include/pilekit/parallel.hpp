#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace pilekit {

// Worker cap: PILE_KIT_THREADS if set, else hardware concurrency.
inline int max_threads() {
  if (const char* env = std::getenv("PILE_KIT_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

namespace detail {
inline thread_local bool in_parallel_region = false;
}

// Static block partition; results must be written to disjoint slots so the
// gather order is deterministic regardless of scheduling. Nested calls run
// serially in the calling worker.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const int nt = std::min<std::size_t>(max_threads(), count == 0 ? 1 : count);
  if (nt <= 1 || count < 2 || detail::in_parallel_region) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  std::size_t chunk = (count + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    std::size_t lo = t * chunk, hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      detail::in_parallel_region = true;
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace pilekit

#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace htz {

// Worker count: HERGLOTZ_THREADS if set (clamped to [1, 256]), otherwise the
// hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("HERGLOTZ_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return std::min(n, 256);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Run body(i) for i in [0, n) across workers.  Chunks are fixed-size and
// assigned statically, so any data each index writes is disjoint by
// construction when the caller writes only to slot i.
inline void parallel_for(long n, const std::function<void(long)>& body) {
  int workers = std::min<long>(thread_count(), n);
  if (workers <= 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  long chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    long lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (long i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Sum f(i) over [0, n) with a fixed summation tree: partial sums are taken
// over blocks of 64 indices and then combined in block order, so the result
// is bit-identical no matter how many threads ran.
inline double parallel_sum(long n, const std::function<double(long)>& f) {
  const long block = 64;
  long nblocks = (n + block - 1) / block;
  std::vector<double> partial(static_cast<size_t>(std::max<long>(nblocks, 1)),
                              0.0);
  parallel_for(nblocks, [&](long b) {
    double s = 0.0;
    long lo = b * block, hi = std::min(n, lo + block);
    for (long i = lo; i < hi; ++i) s += f(i);
    partial[static_cast<size_t>(b)] = s;
  });
  double total = 0.0;
  for (long b = 0; b < nblocks; ++b) total += partial[static_cast<size_t>(b)];
  return total;
}

}  // namespace htz

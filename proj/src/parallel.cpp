#include "stlreach/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace stlreach {

int thread_count() {
  static const int n = [] {
    if (const char *env = std::getenv("STLREACH_THREADS")) {
      int v = std::atoi(env);
      if (v >= 1) return v;
    }
    return 1;
  }();
  return n;
}

int batch_eval_threads() {
  unsigned hw = std::thread::hardware_concurrency();
  return std::max(thread_count(), hw ? static_cast<int>(hw) : 1);
}

void parallel_for_chunks(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)> &fn,
                         int workers) {
  if (workers <= 0) workers = thread_count();
  workers = static_cast<int>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  if (workers <= 1 || n == 0) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::size_t lo = static_cast<std::size_t>(w) * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto &t : pool) t.join();
}

} // namespace stlreach

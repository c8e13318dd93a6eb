#include "flowlab/parallel.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace flowlab {

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const unsigned hw = std::thread::hardware_concurrency();
  const std::size_t nthreads = std::min<std::size_t>(hw > 0 ? hw : 1, n);
  if (nthreads <= 1 || n < 256) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  const std::size_t chunk = (n + nthreads - 1) / nthreads;
  for (std::size_t tid = 0; tid < nthreads; ++tid) {
    const std::size_t lo = tid * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace flowlab

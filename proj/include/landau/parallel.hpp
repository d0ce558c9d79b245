#pragma once
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace landau {

// Worker count: hardware concurrency, capped by LANDAU_TORUS_THREADS when set.
int worker_count();

// Runs f(i) for i in [0, n) on contiguous static chunks. f must only write to
// slots owned by i; reductions happen afterwards in a fixed order.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers = static_cast<std::size_t>(worker_count());
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const std::size_t nt = workers < n ? workers : n;
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex mu;
  for (std::size_t t = 0; t < nt; ++t) {
    const std::size_t lo = n * t / nt, hi = n * (t + 1) / nt;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace landau

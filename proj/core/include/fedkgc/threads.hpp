#pragma once
// Deterministic fork-join helper: work items write to disjoint,
// index-addressed slots, so results never depend on the worker count.

#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace fedkgc {

// Runs fn(i) for i in [0, n), split into contiguous chunks across up to
// `threads` workers. fn must only touch state owned by index i. The first
// exception thrown by any worker is rethrown after all workers join.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads < 1) threads = 1;
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t t = 0; t < workers; ++t) {
    std::size_t lo = t * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// CLI --threads value, or FEDKGC_THREADS, or 4.
inline int resolve_threads(int cli_value) {
  if (cli_value >= 1) return cli_value;
  if (const char* env = std::getenv("FEDKGC_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 4;
}

}  // namespace fedkgc

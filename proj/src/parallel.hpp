#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace unmix {

// Thread count resolution: explicit request wins, then knob named by `env`
// (UNMIX_THREADS), then hardware concurrency.
inline int resolve_threads(int requested, const char* env = "UNMIX_THREADS") {
  if (requested > 0) return requested;
  if (const char* s = std::getenv(env)) {
    int v = std::atoi(s);
    if (v > 0) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Index-parallel loop with a shared work counter. fn must handle its own
// per-index failures if the loop is to continue; an escaped exception stops
// the calling thread's stream and is rethrown after the join.
inline void parallel_for(int n, int threads,
                         const std::function<void(int)>& fn) {
  if (n <= 0) return;
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error = nullptr;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace unmix

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dwl {

/// Worker count: DWL_WORKERS if set and positive, else the hardware width.
inline int default_workers() {
  if (const char* env = std::getenv("DWL_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(k) for k in [0, count) on at most `workers` threads. Tasks are
/// handed out in index order; the first exception is rethrown after all
/// workers stop. Results must be written to per-index slots by the caller,
/// which keeps the outcome independent of scheduling.
template <class Body>
void parallel_for(int count, Body&& body, int workers = default_workers()) {
  workers = std::clamp(workers, 1, std::max(1, count));
  if (workers == 1) {
    for (int k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (int k = next++; k < count; k = next++) {
      try {
        body(k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace dwl

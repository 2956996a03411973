#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lqwidth {

/// Worker count from LQWIDTH_WORKERS, else the hardware concurrency (at least 1).
std::size_t default_workers();
/// Overrides default_workers() for the rest of the process; 0 restores the default.
void set_default_workers(std::size_t workers);

/// out[i] = f(i) for i < count, spread over up to `workers` threads. The first
/// exception thrown by any task is rethrown after all threads join.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t count, F&& f, std::size_t workers = default_workers()) {
  std::vector<T> out(count);
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace lqwidth

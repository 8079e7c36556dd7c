#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dspike {

/// Worker count: `requested`, or the hardware concurrency when 0, never more
/// than `jobs`.
inline std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t w = requested;
  if (w == 0) w = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(w, jobs));
}

/// Runs job(i) for i in [0, jobs) on a bounded pool. Jobs must write only to
/// their own output slots. The first exception thrown by a job is rethrown
/// after all workers stop.
template <class Job>
void parallel_for(std::size_t jobs, std::size_t threads, Job&& job) {
  if (jobs == 0) return;
  const std::size_t workers = worker_count(threads, jobs);
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (!failed.load()) {
          const std::size_t i = next.fetch_add(1);
          if (i >= jobs) break;
          try {
            job(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed.store(true);
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace dspike

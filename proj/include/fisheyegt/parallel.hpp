#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace fisheyegt {

/// Number of workers used by row-parallel loops on the calling thread.
/// Defaults to the hardware concurrency.
unsigned worker_count() noexcept;
void set_worker_count(unsigned workers) noexcept;

/// Overrides the worker count for the current thread while in scope. Frame
/// workers use it to keep nested row loops sequential.
class ScopedWorkerCount {
 public:
  explicit ScopedWorkerCount(unsigned workers) noexcept;
  ~ScopedWorkerCount();
  ScopedWorkerCount(const ScopedWorkerCount&) = delete;
  ScopedWorkerCount& operator=(const ScopedWorkerCount&) = delete;

 private:
  unsigned previous_;
};

/// Splits [0, rows) into contiguous bands and calls fn(begin, end) for each,
/// one band per worker. The first exception thrown by any band is rethrown
/// after all bands finish.
template <typename Fn>
void parallel_for_rows(int rows, Fn&& fn) {
  const unsigned workers = std::min<unsigned>(worker_count(), rows > 0 ? rows : 1);
  if (workers <= 1) {
    if (rows > 0) fn(0, rows);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      const int begin = static_cast<int>(static_cast<long long>(rows) * w / workers);
      const int end = static_cast<int>(static_cast<long long>(rows) * (w + 1) / workers);
      threads.emplace_back([&, w, begin, end] {
        ScopedWorkerCount sequential(1);
        try {
          fn(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace fisheyegt

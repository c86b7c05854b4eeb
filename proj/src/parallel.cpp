#include "fisheyegt/parallel.hpp"

#include <atomic>

namespace fisheyegt {
namespace {

unsigned default_workers() noexcept {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::atomic<unsigned> g_workers{default_workers()};
thread_local unsigned t_override = 0;

}  // namespace

unsigned worker_count() noexcept {
  return t_override != 0 ? t_override : g_workers.load(std::memory_order_relaxed);
}

void set_worker_count(unsigned workers) noexcept {
  g_workers.store(workers == 0 ? default_workers() : workers, std::memory_order_relaxed);
}

ScopedWorkerCount::ScopedWorkerCount(unsigned workers) noexcept : previous_(t_override) {
  t_override = workers;
}

ScopedWorkerCount::~ScopedWorkerCount() { t_override = previous_; }

}  // namespace fisheyegt

#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace zipcurve {

// Worker count. ZIPPER_THREADS caps it; 0 or unset means hardware auto.
inline int worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("ZIPPER_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0 && static_cast<unsigned>(cap) < hw) return static_cast<int>(cap);
  }
  return static_cast<int>(hw);
}

// Runs task(i) for i in [0, task_count). Task boundaries are fixed by the
// caller and each task writes to its own slot, so results are identical
// for any thread count; only wall time changes.
template <class F>
void run_tasks(int task_count, F&& task) {
  const int workers = std::min(worker_count(), task_count);
  if (workers <= 1) {
    for (int i = 0; i < task_count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= task_count) return;
        task(i);
      }
    });
  for (auto& t : pool) t.join();
}

}  // namespace zipcurve

#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace memlab {

// Fork-join over task indices with a static stride partition. Task -> output
// mappings are fixed by index, so the thread count never changes results.
inline void run_parallel(std::size_t n_tasks, int n_threads,
                         const std::function<void(std::size_t)>& fn) {
  if (n_tasks == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(n_tasks, n_threads < 1 ? 1 : static_cast<std::size_t>(n_threads));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([w, workers, n_tasks, &fn] {
      for (std::size_t i = w; i < n_tasks; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(hw == 0 ? 1 : (hw > 8 ? 8 : hw));
}

}  // namespace memlab

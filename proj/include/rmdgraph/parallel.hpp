#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace rmdgraph {

/// Worker cap for parallel_for. RMDGRAPH_THREADS (>= 1) overrides the
/// hardware count; the variable is re-read on every call so tests can
/// change it at runtime.
inline unsigned max_threads() {
  if (const char* env = std::getenv("RMDGRAPH_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

namespace detail {
inline bool& in_parallel_region() {
  thread_local bool flag = false;
  return flag;
}
}  // namespace detail

/// Runs fn(i) for every i in [0, n). Each index must write only to its own
/// output slot; under that discipline the result is independent of the
/// worker count. Nested calls degrade to sequential execution, and fn must
/// not throw when the loop actually runs parallel.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(max_threads(), n == 0 ? 1 : n);
  if (workers <= 1 || detail::in_parallel_region()) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    detail::in_parallel_region() = true;
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      fn(i);
    }
    detail::in_parallel_region() = false;
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 0; t + 1 < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
}

}  // namespace rmdgraph

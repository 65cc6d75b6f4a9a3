#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace pulseforge::detail {

/// Runs body(i) for i in [0, n) on up to `jobs` threads. Each index is
/// handled by exactly one call, so writes to slot i need no locking.
template <typename Body>
void parallel_for(int n, int jobs, Body body) {
  jobs = std::clamp(jobs, 1, std::max(n, 1));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += jobs) body(i);
      } catch (...) {
        errors[std::size_t(w)] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace pulseforge::detail

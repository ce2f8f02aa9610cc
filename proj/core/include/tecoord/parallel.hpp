#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace tecoord {

/// Worker count for internal parallel loops.  TECOORD_THREADS caps it;
/// 0 or unset means hardware concurrency.
inline std::size_t thread_count() {
  std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TECOORD_THREADS")) {
    try {
      const auto cap = std::stoul(env);
      if (cap > 0) return std::min<std::size_t>(cap, hw);
    } catch (const std::exception&) {
    }
  }
  return hw;
}

/// Runs body(i) for i in [0, n).  Each index is visited exactly once; callers
/// write results into index-addressed slots so the outcome does not depend
/// on scheduling.  The first exception (by index) is rethrown.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace tecoord

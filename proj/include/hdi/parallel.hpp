#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "hdi/types.hpp"

namespace hdi {

/// Number of worker threads to actually use; 0 requests the hardware count.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
///
/// Each index is processed exactly once and results must be written to
/// per-index slots by the caller, so the outcome does not depend on the
/// thread count or the interleaving. The first exception (by index order)
/// is rethrown on the calling thread.
inline void parallel_for(Index count, int threads,
                         const std::function<void(Index)>& fn) {
  threads = std::min<Index>(resolve_threads(threads), count);
  if (count <= 0) return;
  if (threads <= 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }

  std::vector<std::exception_ptr> errors(static_cast<size_t>(count));
  std::vector<std::thread> workers;
  workers.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    workers.emplace_back([&, t]() {
      for (Index i = t; i < count; i += threads) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace hdi

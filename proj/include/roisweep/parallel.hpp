#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace roisweep {

/// 0 selects the hardware concurrency.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [begin, end) over contiguous chunks. Callers must only
/// write disjoint outputs per index, so results do not depend on the thread count.
template <typename Fn>
void parallel_for(int begin, int end, int threads, Fn&& fn) {
  const int count = end - begin;
  if (count <= 0) return;
  const int workers = std::min(resolve_threads(threads), count);
  if (workers <= 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + static_cast<int>(static_cast<long long>(count) * w / workers);
    const int hi = begin + static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
    pool.emplace_back([&, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace roisweep

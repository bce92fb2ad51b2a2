#pragma once

/**
 * @file parallel.hpp
 * @brief Index-parallel loops whose results never depend on the thread count.
 *
 * Work items are written to slots owned by their index; callers reduce the
 * slots afterwards in canonical order.
 */

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace minkowski {

inline unsigned default_thread_count() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

/// Calls body(i) for i in [0, count) on up to `threads` workers.
/// The first exception thrown by any body is rethrown on the caller.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

/// Balanced pairwise reduction of items[first, last) in index order.
template <class T, class Combine>
T pairwise_reduce(const std::vector<T>& items, std::size_t first, std::size_t last, Combine&& combine) {
  if (last - first == 1) return items[first];
  const std::size_t middle = first + (last - first) / 2;
  return combine(pairwise_reduce(items, first, middle, combine), pairwise_reduce(items, middle, last, combine));
}

}  // namespace minkowski

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mfg {

namespace detail {
inline std::atomic<unsigned>& thread_cap_storage() {
  static std::atomic<unsigned> cap{0};
  return cap;
}
}  // namespace detail

/// Global cap on worker threads; 0 restores the hardware default.
inline void set_thread_cap(unsigned cap) { detail::thread_cap_storage() = cap; }

inline unsigned worker_count() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned cap = detail::thread_cap_storage();
  return cap == 0 ? hw : std::min(cap, hw);
}

/// Runs body(begin, end) over contiguous chunks of [0, count). Chunks write
/// disjoint outputs, so results never depend on the thread count.
template <class Body>
void parallel_for(std::size_t count, Body&& body, std::size_t min_chunk = 256) {
  const std::size_t workers =
      std::min<std::size_t>(worker_count(), (count + min_chunk - 1) / std::max<std::size_t>(min_chunk, 1));
  if (workers <= 1) {
    if (count > 0) body(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace mfg

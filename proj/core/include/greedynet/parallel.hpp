#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace greedynet {

/// Number of workers to use when the caller passes 0.
inline unsigned default_threads() {
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(worker, begin, end) over a static partition of [0, count).
/// Worker w always receives the same range for a given (count, threads), so
/// per-worker accumulators reduced in worker order are deterministic.
/// The first exception thrown by any worker is rethrown on the caller.
template <class Fn>
void parallel_chunks(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) {
    threads = default_threads();
  }
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    fn(0u, std::size_t{0}, count);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  const std::size_t base = count / threads;
  const std::size_t extra = count % threads;
  std::size_t begin = 0;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t end = begin + base + (w < extra ? 1 : 0);
    pool.emplace_back([&, w, begin, end] {
      try {
        fn(w, begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) {
          error = std::current_exception();
        }
      }
    });
    begin = end;
  }
  pool.clear();
  if (error) {
    std::rethrow_exception(error);
  }
}

/// Element-wise convenience wrapper around parallel_chunks.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  parallel_chunks(count, threads, [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      fn(i);
    }
  });
}

} // namespace greedynet

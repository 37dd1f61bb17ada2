// Copyright (c) 2026 uecheck developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ue {

/// Runs fn(chunk_index, begin, end) over [0, n_items) split into fixed-size
/// chunks, pulled by worker threads from a shared counter. Chunk boundaries
/// do not depend on the thread count, so per-chunk results are reproducible;
/// callers merge them in chunk order for a deterministic reduction.
inline void parallel_chunks(std::size_t n_items, std::size_t chunk_size, int n_threads,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (chunk_size == 0) chunk_size = 1;
  std::size_t n_chunks = (n_items + chunk_size - 1) / chunk_size;
  if (n_threads < 1) n_threads = 1;

  if (n_threads == 1 || n_chunks <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      std::size_t b = c * chunk_size;
      fn(c, b, std::min(b + chunk_size, n_items));
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) break;
      std::size_t b = c * chunk_size;
      try {
        fn(c, b, std::min(b + chunk_size, n_items));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        break;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Default thread count: the UE_THREADS environment variable when set,
/// otherwise the hardware concurrency.
inline int default_thread_count() {
  if (const char* env = std::getenv("UE_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace ue

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace fquant {

// Fixed number of chunks independent of the machine, so per-chunk partial
// results (and therefore any merge done in chunk order) are reproducible
// across thread counts.
inline int default_chunk_count() { return 64; }

// Runs fn(chunk_index, begin, end) over [0, n) split into n_chunks contiguous
// ranges. fn may run concurrently for different chunks; callers keep
// per-chunk accumulators and merge them in chunk order afterwards.
inline void parallel_chunks(std::uint64_t n, int n_chunks,
                            const std::function<void(int, std::uint64_t, std::uint64_t)>& fn) {
  if (n == 0) return;
  if (static_cast<std::uint64_t>(n_chunks) > n) n_chunks = static_cast<int>(n);
  auto bound = [&](int c) { return n * static_cast<std::uint64_t>(c) / n_chunks; };

  unsigned hw = std::thread::hardware_concurrency();
  int workers = static_cast<int>(hw ? hw : 1);
  if (workers > n_chunks) workers = n_chunks;
  if (workers <= 1) {
    for (int c = 0; c < n_chunks; ++c) fn(c, bound(c), bound(c + 1));
    return;
  }

  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      int c = next.fetch_add(1);
      if (c >= n_chunks) return;
      fn(c, bound(c), bound(c + 1));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

}  // namespace fquant

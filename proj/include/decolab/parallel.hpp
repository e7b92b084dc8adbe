#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace decolab {

// Worker cap: DECOLAB_THREADS if set (>= 1), else hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("DECOLAB_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && n >= 1) return static_cast<unsigned>(std::min(n, 1024L));
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

inline constexpr std::size_t default_block_size = 4096;

// Runs fn(block_index, begin, end) over fixed-size blocks of [0, n_items).
// Block boundaries depend only on n_items, never on the worker count, so a
// caller that stores per-block partials and combines them in block order gets
// bit-identical results for any number of threads. fn must not throw.
template <class Fn>
void for_each_block(std::size_t n_items, Fn&& fn,
                    std::size_t block_size = default_block_size) {
  if (n_items == 0) return;
  const std::size_t n_blocks = (n_items + block_size - 1) / block_size;
  const std::size_t workers =
      std::min<std::size_t>(worker_count(), n_blocks);

  auto run_block = [&](std::size_t b) {
    const std::size_t begin = b * block_size;
    const std::size_t end = std::min(n_items, begin + block_size);
    fn(b, begin, end);
  };

  if (workers <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
    return;
  }

  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1))
      run_block(b);
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(drain);
  drain();
  for (auto& t : pool) t.join();
}

}  // namespace decolab

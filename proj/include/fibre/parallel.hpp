#pragma once

// Fixed-chunk parallel loops. Chunk boundaries depend only on the problem
// size, never on the thread count, so per-chunk partial results combined in
// chunk order give bit-identical reductions for any number of threads.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fibre::parallel {

void set_threads(unsigned n);  // 0 = hardware concurrency
unsigned threads();

inline constexpr std::size_t kChunk = 512;

inline std::size_t chunk_count(std::size_t n) { return (n + kChunk - 1) / kChunk; }

/// Calls fn(begin, end, chunk_index) for every chunk of [0, n).
template <class Fn>
void for_chunks(std::size_t n, Fn&& fn) {
  const std::size_t chunks = chunk_count(n);
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads(), chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c * kChunk, std::min(n, (c + 1) * kChunk), c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(chunks);
  auto work = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        fn(c * kChunk, std::min(n, (c + 1) * kChunk), c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace fibre::parallel

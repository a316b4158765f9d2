#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace wrapcop {

/* Thread budget: explicit request > WRAPCOP_THREADS > hardware concurrency. */
inline unsigned resolve_threads(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("WRAPCOP_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/*
 * Runs fn(i) for i in [0, n). Work items must be independent; callers own
 * determinism by keying any randomness and output slots on the index.
 */
template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& fn) {
  threads = resolve_threads(threads);
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (threads > n) threads = static_cast<unsigned>(n);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([t, threads, &fn, n]() {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace wrapcop

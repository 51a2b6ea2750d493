#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace ecr {

/// Resolves a thread-count request: n >= 1 is taken as-is, n == 0 consults the
/// ECR_THREADS environment variable and falls back to 1.
inline int resolve_threads(int requested) {
  if (requested >= 1) return requested;
  if (const char* env = std::getenv("ECR_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

/// Runs fn(i) for i in [begin, end) on up to `threads` workers. Iterations must
/// be independent; chunks are contiguous so results do not depend on the
/// schedule. Exceptions from workers are rethrown on the calling thread.
template <typename Fn>
void parallel_for(long begin, long end, int threads, Fn&& fn) {
  const long count = end - begin;
  if (count <= 0) return;
  threads = std::min<long>(std::max(1, threads), count);
  if (threads == 1) {
    for (long i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const long chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const long lo = begin + t * chunk;
    const long hi = std::min(end, lo + chunk);
    pool.emplace_back([&, t, lo, hi] {
      try {
        for (long i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace ecr

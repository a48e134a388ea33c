#ifndef NEGBAYES_PARALLEL_HPP
#define NEGBAYES_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace negbayes {

// Runs fn(0..n-1) on up to `threads` workers. Callers must write results into
// per-index slots so the outcome does not depend on scheduling. The first
// exception thrown by any worker is rethrown here after all workers join.
template <typename Fn>
void parallel_for(int64_t n, int threads, Fn&& fn) {
  if (n <= 0) return;
  if (threads <= 1 || n == 1) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  int workers = static_cast<int>(std::min<int64_t>(threads, n));
  std::atomic<int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;  // written only by the thread that wins the CAS below

  auto body = [&] {
    for (;;) {
      int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n || failed.load(std::memory_order_relaxed)) return;
      try {
        fn(i);
      } catch (...) {
        bool expected = false;
        if (failed.compare_exchange_strong(expected, true)) error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace negbayes

#endif  // NEGBAYES_PARALLEL_HPP

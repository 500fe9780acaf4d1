#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace brownian_atlas {

// Runs fn(replica) for replica in [0, count) on a worker pool. Workers pull
// indices from a shared counter; callers write results into replica-indexed
// slots, so output never depends on scheduling. Exceptions are captured and
// the first one rethrown after all workers join.
template <typename Fn>
void parallel_for_replicas(int threads, long count, Fn&& fn) {
  if (threads < 1) threads = 1;
  if (threads == 1 || count <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_workers = static_cast<int>(std::min<long>(threads, count));
  pool.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace brownian_atlas

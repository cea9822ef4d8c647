#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace malstone {

/// Runs fn(worker, i) for i in [0, n) on up to `workers` threads, never more
/// than the machine's hardware threads. Each thread has a stable worker index
/// below `workers` and pulls indices dynamically. The first exception stops
/// further scheduling and is rethrown on the caller.
template <class Fn>
void parallel_for_workers(std::size_t n, unsigned workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto run = [&](unsigned worker) {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(worker, i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto threads =
      static_cast<unsigned>(std::min<std::size_t>(std::min(std::max(1u, workers), hw), std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(run, t);
  run(0);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  parallel_for_workers(n, workers, [&](unsigned, std::size_t i) { fn(i); });
}

}  // namespace malstone

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace parkmatch {

// Worker count used when a caller passes 0: PARKMATCH_THREADS if set,
// otherwise the hardware concurrency, capped at 16.
int default_workers();

// Splits [0, trials) into fixed chunks of `chunk` trials and runs
// fn(chunk_index, begin, end) over a worker pool. Chunk boundaries do not
// depend on the worker count, so per-chunk partial results reduced in
// chunk order give identical bits for any number of workers.
template <typename Fn>
void for_each_chunk(std::size_t trials, std::size_t chunk, int workers, Fn&& fn) {
  if (trials == 0) return;
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t chunks = (trials + chunk - 1) / chunk;
  if (workers <= 0) workers = default_workers();
  const std::size_t pool = std::min<std::size_t>(static_cast<std::size_t>(workers), chunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        fn(c, c * chunk, std::min(trials, (c + 1) * chunk));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(chunks);
      }
    }
  };
  if (pool <= 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (std::size_t i = 0; i < pool; ++i) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);
}

inline std::size_t chunk_count(std::size_t trials, std::size_t chunk) { return (trials + chunk - 1) / chunk; }

}  // namespace parkmatch

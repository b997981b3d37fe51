#include "transmod/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace transmod {

namespace {
std::atomic<int> g_max_threads{1};
thread_local bool tl_in_parallel = false;
}  // namespace

void set_max_threads(int n) { g_max_threads.store(n < 1 ? 1 : n); }

int max_threads() { return g_max_threads.load(); }

std::size_t chunk_count(std::size_t n_items, std::size_t chunk_size) {
  if (n_items == 0) return 0;
  return (n_items + chunk_size - 1) / chunk_size;
}

void parallel_chunks(std::size_t n_items, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  const std::size_t n_chunks = chunk_count(n_items, chunk_size);
  if (n_chunks == 0) return;

  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * chunk_size;
    const std::size_t end = begin + chunk_size < n_items ? begin + chunk_size : n_items;
    fn(c, begin, end);
  };

  const int threads = g_max_threads.load();
  if (threads <= 1 || n_chunks == 1 || tl_in_parallel) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
    return;
  }

  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), n_chunks);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t t = 0; t < n_workers; ++t) {
    pool.emplace_back([&]() {
      tl_in_parallel = true;
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= n_chunks) break;
        run_chunk(c);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace transmod

#include "scaleopt/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace scaleopt {

namespace {

int threads_from_env() {
  if (const char* env = std::getenv("SCALE_OPT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

std::atomic<int> g_threads{0};  // 0 = not initialized yet

}  // namespace

void set_num_threads(int n) {
  g_threads.store(n >= 1 ? n : threads_from_env(), std::memory_order_relaxed);
}

int num_threads() {
  int n = g_threads.load(std::memory_order_relaxed);
  if (n == 0) {
    n = threads_from_env();
    g_threads.store(n, std::memory_order_relaxed);
  }
  return n;
}

void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t n_chunks = (n + kChunkSize - 1) / kChunkSize;
  const auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * kChunkSize;
    fn(c, begin, std::min(begin + kChunkSize, n));
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(num_threads()), n_chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
    return;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1))
      run_chunk(c);
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t i = 0; i + 1 < workers; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

}  // namespace scaleopt

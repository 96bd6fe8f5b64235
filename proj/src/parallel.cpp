#include "mvsc/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace mvsc::par {

namespace {
std::atomic<int> g_max_threads{0};

int effective_threads() {
  int t = g_max_threads.load();
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, t);
}
}  // namespace

void set_max_threads(int threads) { g_max_threads.store(threads); }

int max_threads() { return effective_threads(); }

void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end,
                  const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& fn) {
  const std::ptrdiff_t count = end - begin;
  if (count <= 0) return;
  const int threads = static_cast<int>(
      std::min<std::ptrdiff_t>(effective_threads(), count));
  if (threads <= 1) {
    fn(begin, end);
    return;
  }
  const std::ptrdiff_t chunk = (count + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    const std::ptrdiff_t b = begin + t * chunk;
    const std::ptrdiff_t e = std::min(end, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace mvsc::par

#include "smoothent/threading.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace smoothent {

namespace {
std::atomic<int> g_max_threads{0};  // 0 = hardware concurrency
}

int max_threads() {
  int n = g_max_threads.load(std::memory_order_relaxed);
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, n);
}

void set_max_threads(int n) { g_max_threads.store(n, std::memory_order_relaxed); }

void parallel_for(std::int64_t n,
                  const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (n <= 0) return;
  const int nt = static_cast<int>(std::min<std::int64_t>(max_threads(), n));
  if (nt == 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(nt));
  const std::int64_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const std::int64_t begin = t * chunk;
    const std::int64_t end = std::min<std::int64_t>(begin + chunk, n);
    if (begin >= end) break;
    workers.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& w : workers) w.join();
}

}  // namespace smoothent

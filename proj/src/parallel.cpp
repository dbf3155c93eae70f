#include "afflow/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace afflow {

namespace {

int initial_thread_count() {
  if (const char* env = std::getenv("AFFLOW_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

std::atomic<int> g_threads{0};

}  // namespace

int thread_count() {
  int n = g_threads.load(std::memory_order_relaxed);
  if (n == 0) {
    n = initial_thread_count();
    g_threads.store(n, std::memory_order_relaxed);
  }
  return n;
}

void set_thread_count(int threads) {
  g_threads.store(threads >= 1 ? threads : 1, std::memory_order_relaxed);
}

void parallel_for(Eigen::Index begin, Eigen::Index end,
                  const std::function<void(Eigen::Index)>& body) {
  const Eigen::Index total = end - begin;
  const int workers = static_cast<int>(
      std::min<Eigen::Index>(thread_count(), total > 0 ? total : 1));
  if (workers <= 1) {
    for (Eigen::Index i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const Eigen::Index chunk = (total + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const Eigen::Index lo = begin + w * chunk;
    const Eigen::Index hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (Eigen::Index i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace afflow

#include "stereoprop/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace stereoprop {
namespace {

std::atomic<std::size_t> g_threads{1};

}  // namespace

void set_num_threads(std::size_t n) { g_threads = std::max<std::size_t>(n, 1); }

std::size_t num_threads() { return g_threads; }

void parallel_rows(std::size_t rows,
                   const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(num_threads(), rows);
  if (workers <= 1) {
    for (std::size_t y = 0; y < rows; ++y) fn(y);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t y = t; y < rows; y += workers) fn(y);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace stereoprop

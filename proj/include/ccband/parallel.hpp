#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace ccband {

// Runs fn(0..n-1), splitting the index range across threads. The caller owns
// output placement by index, so results are deterministic regardless of the
// thread count.
inline void parallel_for(std::size_t n, int threads,
                         std::function<void(std::size_t)> const& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t nt = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += nt) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

} // namespace ccband

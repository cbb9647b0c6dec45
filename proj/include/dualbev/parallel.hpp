#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace dualbev {

/// Splits [0, n) into `threads` contiguous chunks and runs fn(begin, end) on
/// each. Chunks never overlap, so per-item work that writes only its own
/// outputs gives the same bits for any thread count.
template <typename Fn>
void parallel_ranges(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t b = std::min(n, w * chunk), e = std::min(n, (w + 1) * chunk);
    if (b < e) pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(std::size_t{0}, std::min(n, chunk));
}

}  // namespace dualbev

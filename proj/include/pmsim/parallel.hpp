#pragma once
#include <algorithm>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace pmsim {

// Static partition of [0, n) into at most `jobs` contiguous chunks, one
// thread each; fn(chunk_index, begin, end). Chunk boundaries depend only on
// (n, jobs), and callers merge per-chunk results in chunk order, so outputs
// are independent of scheduling.
inline void parallel_chunks(std::int64_t n, int jobs,
                            const std::function<void(int, std::int64_t, std::int64_t)>& fn) {
  if (jobs < 1) jobs = 1;
  const int k = static_cast<int>(std::min<std::int64_t>(jobs, std::max<std::int64_t>(n, 1)));
  if (k <= 1) {
    fn(0, 0, n);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));
  const std::int64_t base = n / k;
  const std::int64_t rem = n % k;
  std::int64_t start = 0;
  for (int c = 0; c < k; ++c) {
    const std::int64_t len = base + (c < rem ? 1 : 0);
    const std::int64_t begin = start;
    const std::int64_t end = start + len;
    start = end;
    threads.emplace_back([&, c, begin, end] {
      try {
        fn(c, begin, end);
      } catch (...) {
        errors[static_cast<std::size_t>(c)] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace pmsim

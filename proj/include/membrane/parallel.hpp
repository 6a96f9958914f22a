#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace membrane {

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Work items are handed out
/// by index, so callers that write results into slot i get scheduling-independent output.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  workers = std::max(1u, workers);
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr error;
  auto body = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= count || error) return;
        i = next++;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const unsigned n = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(body);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace membrane

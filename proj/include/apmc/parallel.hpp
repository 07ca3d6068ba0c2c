#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace apmc {

/// Smallest chunk worth a thread of its own.
inline constexpr std::size_t kMinChunk = 8192;

/// Runs body(begin, end) over [0, n) split into at most `workers` contiguous
/// chunks. Bodies must only touch their own index range. The first exception
/// thrown by any chunk is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
  workers = static_cast<unsigned>(std::clamp<std::size_t>(n / kMinChunk, 1, std::max(1u, workers)));
  if (workers == 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  auto guarded = [&](std::size_t b, std::size_t e) {
    try {
      body(b, e);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  const std::size_t chunk = (n + workers - 1) / workers;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) {
      const std::size_t b = std::min(n, w * chunk);
      const std::size_t e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(guarded, b, e);
    }
    guarded(0, std::min(n, chunk));
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace apmc

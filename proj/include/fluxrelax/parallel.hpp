#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fluxrelax {

/// Runs body(i) for i in [0, n) on a small pool of worker threads.
///
/// Tasks are independent; results must be written to per-index slots by the
/// caller. If any task throws, the exception of the lowest failing index is
/// rethrown after all workers join, so failures are reported deterministically.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, std::size_t max_threads = 0) {
  if (n == 0) return;
  std::size_t workers = max_threads != 0 ? max_threads : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, n);

  std::vector<std::exception_ptr> errors(n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace fluxrelax

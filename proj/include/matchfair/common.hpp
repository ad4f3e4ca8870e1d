#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace matchfair {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivisionByZero : public Error {
 public:
  DivisionByZero() : Error("division by zero") {}
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// A size cap was hit (variables, rows, instance size, grid denominator).
class CapExceeded : public Error {
 public:
  using Error::Error;
};

class TimeLimitExceeded : public Error {
 public:
  TimeLimitExceeded() : Error("time limit exceeded") {}
};

/// Raised when an invariant that the mathematics guarantees fails to hold.
class InternalError : public Error {
 public:
  using Error::Error;
};

/// Execution limits threaded through the expensive operations.
struct RunLimits {
  std::optional<std::chrono::steady_clock::time_point> deadline;
  /// Lift the vertex-enumeration size caps.
  bool override_caps = false;
  unsigned threads = 1;

  static RunLimits with_seconds(double seconds) {
    RunLimits limits;
    limits.deadline = std::chrono::steady_clock::now() +
                      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(seconds));
    return limits;
  }

  void check() const {
    if (deadline && std::chrono::steady_clock::now() > *deadline) {
      throw TimeLimitExceeded();
    }
  }
};

/// Worker count from MATCHFAIR_THREADS, defaulting to 1.
inline unsigned threads_from_environment() {
  const char* value = std::getenv("MATCHFAIR_THREADS");
  if (value == nullptr) return 1;
  try {
    const long parsed = std::stol(value);
    return parsed > 0 ? static_cast<unsigned>(std::min<long>(parsed, 256)) : 1;
  } catch (const std::exception&) {
    return 1;
  }
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Exceptions
/// from workers are rethrown (the first one wins) after all workers join.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace matchfair

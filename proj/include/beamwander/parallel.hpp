#pragma once

#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>

namespace beamwander::detail {

/// Collects exceptions thrown inside an OpenMP loop body; rethrow() after the region
/// raises the one from the lowest iteration so failures do not depend on scheduling.
class LoopErrors {
public:
  template <class F> void run(std::int64_t i, F &&body) noexcept {
    try {
      body();
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (i < index_) {
        index_ = i;
        error_ = std::current_exception();
      }
    }
  }

  void rethrow() const {
    if (error_)
      std::rethrow_exception(error_);
  }

private:
  std::mutex mutex_;
  std::int64_t index_ = std::numeric_limits<std::int64_t>::max();
  std::exception_ptr error_;
};

} // namespace beamwander::detail

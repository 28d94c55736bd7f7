#pragma once

#include <atomic>
#include <stdexcept>

namespace rbi {

/// Process-wide cooperative cancellation flag (set from a SIGINT handler).
inline std::atomic<bool>& cancel_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

struct Cancelled : std::runtime_error {
  Cancelled() : std::runtime_error("cancelled") {}
};

inline void throw_if_cancelled() {
  if (cancel_flag().load(std::memory_order_relaxed)) throw Cancelled();
}

}  // namespace rbi

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace toolrag {

/// Millisecond time source. Traces and fixture timestamps go through this so
/// scripted sessions can be replayed byte-for-byte.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() = 0;
};

class SystemClock final : public Clock {
 public:
  std::int64_t now_ms() override {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }
};

/// Advances by a fixed step on every read.
class LogicalClock final : public Clock {
 public:
  explicit LogicalClock(std::int64_t start = 0, std::int64_t step = 1) : now_(start), step_(step) {}

  std::int64_t now_ms() override { return now_.fetch_add(step_) + step_; }

 private:
  std::atomic<std::int64_t> now_;
  std::int64_t step_;
};

}  // namespace toolrag

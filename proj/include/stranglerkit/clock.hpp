#pragma once

#include <chrono>
#include <cstdint>

namespace stranglerkit {

/// Injected time source. All health-check and breaker logic is written
/// against logical ticks so tests control time exactly. The HTTP gateway
/// maps one tick to one second of wall time.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::uint64_t now() const = 0;
};

class LogicalClock : public Clock {
 public:
  explicit LogicalClock(std::uint64_t start = 0) : now_(start) {}
  std::uint64_t now() const override { return now_; }
  void advance(std::uint64_t ticks) { now_ += ticks; }
  void set(std::uint64_t t) { now_ = t; }

 private:
  std::uint64_t now_;
};

/// Wall clock in whole seconds since construction.
class SteadyClock : public Clock {
 public:
  SteadyClock() : epoch_(std::chrono::steady_clock::now()) {}
  std::uint64_t now() const override {
    auto d = std::chrono::steady_clock::now() - epoch_;
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(d).count());
  }

 private:
  std::chrono::steady_clock::time_point epoch_;
};

}  // namespace stranglerkit

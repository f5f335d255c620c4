#pragma once

#include <chrono>
#include <ctime>

namespace tgmfe {

/// CPU seconds consumed by the calling thread.
inline double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

struct PhaseTime {
  double wall = 0.0;
  double cpu = 0.0;

  PhaseTime& operator+=(const PhaseTime& o) {
    wall += o.wall;
    cpu += o.cpu;
    return *this;
  }
};

/// Measures wall and thread-CPU time from construction.
class Stopwatch {
public:
  Stopwatch() : wall0_(std::chrono::steady_clock::now()), cpu0_(thread_cpu_seconds()) {}

  PhaseTime elapsed() const {
    const std::chrono::duration<double> w = std::chrono::steady_clock::now() - wall0_;
    return {w.count(), thread_cpu_seconds() - cpu0_};
  }

private:
  std::chrono::steady_clock::time_point wall0_;
  double cpu0_;
};

}  // namespace tgmfe

#pragma once

#include <chrono>

namespace glmscale {

// Wall-clock stopwatch that can be paused, so bookkeeping done between
// iterations is left out of the measured time.
class Stopwatch {
 public:
  using Clock = std::chrono::steady_clock;

  Stopwatch() : start_(Clock::now()) {}

  double seconds() const {
    auto total = accumulated_;
    if (running_) total += Clock::now() - start_;
    return std::chrono::duration<double>(total).count();
  }

  void pause() {
    if (!running_) return;
    accumulated_ += Clock::now() - start_;
    running_ = false;
  }

  void resume() {
    if (running_) return;
    start_ = Clock::now();
    running_ = true;
  }

 private:
  Clock::time_point start_;
  Clock::duration accumulated_{};
  bool running_ = true;
};

}  // namespace glmscale

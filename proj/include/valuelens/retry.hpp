#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace valuelens {

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

/// Bounded exponential backoff. Quota pauses are budgeted separately from
/// transport retries.
struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30'000};
  int max_quota_pauses = 20;
  std::chrono::milliseconds quota_pause{60'000};

  /// Delay before retry number `retry` (1-based).
  std::chrono::milliseconds backoff_for(int retry) const {
    double ms = static_cast<double>(initial_backoff.count());
    for (int i = 1; i < retry; ++i) ms *= multiplier;
    const double cap = static_cast<double>(max_backoff.count());
    return std::chrono::milliseconds(static_cast<long long>(ms < cap ? ms : cap));
  }
};

/// Spaces request starts at least 1/rate apart across all threads. A rate of
/// zero or less disables limiting.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second, Sleeper sleep = real_sleeper())
      : sleep_(std::move(sleep)) {
    if (per_second > 0.0) {
      interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(1.0 / per_second));
    }
  }

  void acquire() {
    if (interval_.count() == 0) return;
    std::chrono::steady_clock::time_point slot;
    {
      std::lock_guard lock(mu_);
      const auto now = std::chrono::steady_clock::now();
      if (next_ < now) next_ = now;
      slot = next_;
      next_ += interval_;
    }
    const auto wait = slot - std::chrono::steady_clock::now();
    if (wait.count() > 0) {
      sleep_(std::chrono::ceil<std::chrono::milliseconds>(wait));
    }
  }

 private:
  Sleeper sleep_;
  std::chrono::steady_clock::duration interval_{0};
  std::mutex mu_;
  std::chrono::steady_clock::time_point next_{};
};

/// Runs fn(i) for i in [0, n) on at most `workers` threads. The first
/// exception stops workers from taking new items and is rethrown here.
template <typename Fn>
void run_bounded(std::size_t n, std::size_t workers, Fn&& fn) {
  if (n == 0) return;
  if (workers == 0) workers = 1;
  if (workers > n) workers = n;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        stop.store(true);
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace valuelens

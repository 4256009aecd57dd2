// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <type_traits>

#include <json.hpp>

#include "deepforge/common/rng.hpp"
#include "deepforge/common/worker_pool.hpp"
#include "deepforge/providers/errors.hpp"

namespace deepforge {

using SteadyClock = std::chrono::steady_clock;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Per-provider call counts and prices (USD per 1000 calls). Thread-safe and
/// monotone: counts only ever grow.
class CostLedger {
 public:
  void set_unit_price(const std::string& provider, double usd_per_1000);
  double unit_price(const std::string& provider) const;
  std::map<std::string, double> unit_prices() const;

  void record(const std::string& provider, std::uint64_t n = 1);
  std::uint64_t count(const std::string& provider) const;
  std::map<std::string, std::uint64_t> counts() const;

  /// Cost of everything recorded so far, in integer micro-USD.
  std::int64_t cost_micro_usd() const;

  nlohmann::json to_json() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::uint64_t> counts_;
  std::map<std::string, double> unit_prices_;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base_delay{500};
  double jitter = 0.2;
};

/// Delay before retry number `retry` (0-based): base * 2^retry scaled by
/// 1 + jitter * (2u - 1) for u in [0, 1).
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry, double u);

/// Sliding-window log limiter: at most `max_calls` acquisitions within any
/// `window`. A limit of 0 disables limiting.
class RateLimiter {
 public:
  explicit RateLimiter(std::size_t max_calls, SteadyClock::duration window = std::chrono::seconds(1));

  /// Blocks until a slot is free. Throws ProviderError("Cancelled").
  void acquire(const CancelToken* cancel = nullptr);

 private:
  std::size_t max_calls_;
  SteadyClock::duration window_;
  std::mutex mu_;
  std::deque<SteadyClock::time_point> log_;
};

/// Counting semaphore for in-flight calls. A cap of 0 means unlimited.
class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(std::size_t cap) : cap_(cap) {}

  class Permit {
   public:
    explicit Permit(ConcurrencyLimiter* owner = nullptr) : owner_(owner) {}
    Permit(Permit&& o) noexcept : owner_(std::exchange(o.owner_, nullptr)) {}
    Permit& operator=(Permit&&) = delete;
    ~Permit() {
      if (owner_) owner_->release();
    }

   private:
    ConcurrencyLimiter* owner_;
  };

  Permit acquire();
  std::size_t peak() const;

 private:
  void release();

  std::size_t cap_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
  std::size_t peak_ = 0;
};

struct GuardOptions {
  RetryPolicy retry;
  std::size_t rate_limit_per_second = 0;
  /// Added to the one-second window so that calls observed downstream with
  /// uneven latency still respect the limit.
  std::chrono::milliseconds rate_window_slack{0};
  std::size_t max_in_flight = 0;
  std::uint64_t jitter_seed = 0;
};

/// Wraps every attempt of one logical provider call: concurrency cap, rate
/// limit, retries with backoff for transient errors, and the ledger entry
/// (exactly one per successful logical call).
class CallGuard {
 public:
  CallGuard(std::string provider, GuardOptions options, std::shared_ptr<CostLedger> ledger, Sleeper sleeper = {});

  template <class F>
  std::invoke_result_t<F&> run(F&& attempt, const CancelToken* cancel = nullptr) {
    auto permit = in_flight_.acquire();
    for (int retry = 0;; ++retry) {
      throw_if_cancelled(cancel);
      rate_.acquire(cancel);
      attempts_.fetch_add(1, std::memory_order_relaxed);
      try {
        if constexpr (std::is_void_v<std::invoke_result_t<F&>>) {
          attempt();
          ledger_->record(provider_);
          return;
        } else {
          auto result = attempt();
          ledger_->record(provider_);
          return result;
        }
      } catch (const ProviderError& e) {
        if (!e.transient()) throw;
        if (retry >= options_.retry.max_retries) {
          throw ProviderError("ProviderUnavailable", provider_ + " failed after " + std::to_string(retry + 1) +
                                                         " attempts; last error: " + e.what());
        }
        pause(retry, cancel);
      }
    }
  }

  const std::string& provider() const noexcept { return provider_; }
  const std::shared_ptr<CostLedger>& ledger() const noexcept { return ledger_; }
  std::uint64_t attempts() const noexcept { return attempts_.load(); }
  std::size_t peak_in_flight() const { return in_flight_.peak(); }

 private:
  static void throw_if_cancelled(const CancelToken* cancel);
  void pause(int retry, const CancelToken* cancel);

  std::string provider_;
  GuardOptions options_;
  std::shared_ptr<CostLedger> ledger_;
  Sleeper sleeper_;
  RateLimiter rate_;
  ConcurrencyLimiter in_flight_;
  std::mutex jitter_mu_;
  Rng jitter_rng_;
  std::atomic<std::uint64_t> attempts_{0};
};

}  // namespace deepforge

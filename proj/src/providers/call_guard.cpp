// SPDX-License-Identifier: Apache-2.0
#include "deepforge/providers/call_guard.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "deepforge/common/hash.hpp"

namespace deepforge {

void CostLedger::set_unit_price(const std::string& provider, double usd_per_1000) {
  if (!(usd_per_1000 >= 0) || !std::isfinite(usd_per_1000)) {
    throw PreconditionError("unit price for " + provider + " must be a finite non-negative number");
  }
  std::lock_guard<std::mutex> lock(mu_);
  unit_prices_[provider] = usd_per_1000;
}

double CostLedger::unit_price(const std::string& provider) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = unit_prices_.find(provider);
  return it == unit_prices_.end() ? 0.0 : it->second;
}

std::map<std::string, double> CostLedger::unit_prices() const {
  std::lock_guard<std::mutex> lock(mu_);
  return unit_prices_;
}

void CostLedger::record(const std::string& provider, std::uint64_t n) {
  std::lock_guard<std::mutex> lock(mu_);
  counts_[provider] += n;
}

std::uint64_t CostLedger::count(const std::string& provider) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = counts_.find(provider);
  return it == counts_.end() ? 0 : it->second;
}

std::map<std::string, std::uint64_t> CostLedger::counts() const {
  std::lock_guard<std::mutex> lock(mu_);
  return counts_;
}

std::int64_t CostLedger::cost_micro_usd() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::int64_t per_thousand = 0;  // micro-USD times 1000
  for (const auto& [provider, n] : counts_) {
    auto it = unit_prices_.find(provider);
    if (it == unit_prices_.end()) continue;
    per_thousand += static_cast<std::int64_t>(n) * std::llround(it->second * 1e6);
  }
  return (per_thousand + 500) / 1000;
}

nlohmann::json CostLedger::to_json() const {
  std::lock_guard<std::mutex> lock(mu_);
  return nlohmann::json{{"counts", counts_}, {"unit_prices", unit_prices_}};
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry, double u) {
  const double base = static_cast<double>(policy.base_delay.count()) * std::ldexp(1.0, std::clamp(retry, 0, 30));
  const double scaled = base * (1.0 + policy.jitter * (2.0 * u - 1.0));
  return std::chrono::milliseconds(std::llround(std::max(0.0, scaled)));
}

RateLimiter::RateLimiter(std::size_t max_calls, SteadyClock::duration window) : max_calls_(max_calls), window_(window) {}

void RateLimiter::acquire(const CancelToken* cancel) {
  if (max_calls_ == 0) return;
  std::unique_lock<std::mutex> lock(mu_);
  while (true) {
    if (cancel && cancel->cancelled()) throw ProviderError("Cancelled", "rate limiter wait cancelled");
    const auto now = SteadyClock::now();
    while (!log_.empty() && now - log_.front() >= window_) log_.pop_front();
    if (log_.size() < max_calls_) {
      log_.push_back(now);
      return;
    }
    const auto wake = log_.front() + window_;
    const auto step = std::min<SteadyClock::duration>(wake - now, std::chrono::milliseconds(50));
    lock.unlock();
    std::this_thread::sleep_for(step);
    lock.lock();
  }
}

ConcurrencyLimiter::Permit ConcurrencyLimiter::acquire() {
  std::unique_lock<std::mutex> lock(mu_);
  if (cap_ > 0) cv_.wait(lock, [&] { return in_flight_ < cap_; });
  ++in_flight_;
  peak_ = std::max(peak_, in_flight_);
  return Permit(this);
}

std::size_t ConcurrencyLimiter::peak() const {
  std::lock_guard<std::mutex> lock(mu_);
  return peak_;
}

void ConcurrencyLimiter::release() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
}

CallGuard::CallGuard(std::string provider, GuardOptions options, std::shared_ptr<CostLedger> ledger, Sleeper sleeper)
    : provider_(std::move(provider)),
      options_(options),
      ledger_(ledger ? std::move(ledger) : std::make_shared<CostLedger>()),
      sleeper_(std::move(sleeper)),
      rate_(options.rate_limit_per_second, std::chrono::seconds(1) + options.rate_window_slack),
      in_flight_(options.max_in_flight),
      jitter_rng_(derive_seed(options.jitter_seed, provider_)) {}

void CallGuard::throw_if_cancelled(const CancelToken* cancel) {
  if (cancel && cancel->cancelled()) throw ProviderError("Cancelled", "call cancelled before dispatch");
}

void CallGuard::pause(int retry, const CancelToken* cancel) {
  double u;
  {
    std::lock_guard<std::mutex> lock(jitter_mu_);
    u = jitter_rng_.uniform();
  }
  const auto delay = backoff_delay(options_.retry, retry, u);
  if (sleeper_) {
    sleeper_(delay);
    return;
  }
  const auto until = SteadyClock::now() + delay;
  while (SteadyClock::now() < until) {
    throw_if_cancelled(cancel);
    std::this_thread::sleep_for(std::min<SteadyClock::duration>(until - SteadyClock::now(), std::chrono::milliseconds(50)));
  }
}

}  // namespace deepforge

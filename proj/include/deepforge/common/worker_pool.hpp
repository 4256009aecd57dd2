// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

namespace deepforge {

/// Cooperative cancellation flag shared by a run. Setting it is async-signal-safe.
class CancelToken {
 public:
  void cancel() noexcept { flag_.store(true, std::memory_order_relaxed); }
  bool cancelled() const noexcept { return flag_.load(std::memory_order_relaxed); }

 private:
  std::atomic<bool> flag_{false};
};

/// Outcome of one work item: either a value or the exception it raised.
template <class R>
struct ItemResult {
  std::optional<R> value;
  std::exception_ptr error;

  bool ok() const noexcept { return value.has_value(); }
};

/// Runs `work(i)` for i in [0, count) on `workers` threads and hands results to
/// `commit(i, result)` strictly in index order on a single thread at a time.
/// The committed sequence is therefore identical for every worker count and
/// schedule. Items not yet started when `cancel` fires are skipped; the
/// committed prefix stays contiguous.
template <class R>
void run_ordered(std::size_t count, std::size_t workers, const std::function<R(std::size_t)>& work,
                 const std::function<void(std::size_t, ItemResult<R>&&)>& commit,
                 const CancelToken* cancel = nullptr) {
  if (count == 0) return;
  workers = std::clamp<std::size_t>(workers, 1, count);

  std::mutex mu;
  std::map<std::size_t, ItemResult<R>> ready;
  std::size_t next_commit = 0;
  bool committing = false;
  std::atomic<std::size_t> next_item{0};
  std::exception_ptr commit_error;

  auto drain = [&](std::unique_lock<std::mutex>& lock) {
    if (committing) return;
    committing = true;
    while (!commit_error) {
      auto it = ready.find(next_commit);
      if (it == ready.end()) break;
      ItemResult<R> result = std::move(it->second);
      ready.erase(it);
      const std::size_t index = next_commit++;
      lock.unlock();
      try {
        commit(index, std::move(result));
      } catch (...) {
        lock.lock();
        commit_error = std::current_exception();
        break;
      }
      lock.lock();
    }
    committing = false;
  };

  auto worker_loop = [&] {
    while (true) {
      {
        std::lock_guard<std::mutex> lock(mu);
        if (commit_error) return;
      }
      if (cancel && cancel->cancelled()) return;
      const std::size_t i = next_item.fetch_add(1);
      if (i >= count) return;
      ItemResult<R> result;
      try {
        result.value.emplace(work(i));
      } catch (...) {
        result.error = std::current_exception();
      }
      std::unique_lock<std::mutex> lock(mu);
      ready.emplace(i, std::move(result));
      drain(lock);
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) threads.emplace_back(worker_loop);
  worker_loop();
  for (auto& th : threads) th.join();
  {
    std::unique_lock<std::mutex> lock(mu);
    drain(lock);
  }
  if (commit_error) std::rethrow_exception(commit_error);
}

}  // namespace deepforge

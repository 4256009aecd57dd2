// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepforge/providers/call_guard.hpp"

namespace deepforge {

struct SearchHit {
  std::string title;
  std::string link;
  std::string snippet;
  int position = 0;
  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

struct SearchResult {
  std::string query;
  std::vector<SearchHit> hits;
  std::optional<std::string> error;  // set when this query alone failed
  friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

void to_json(nlohmann::json& j, const SearchHit& h);
void to_json(nlohmann::json& j, const SearchResult& r);

class SearchBackend {
 public:
  virtual ~SearchBackend() = default;
  virtual std::vector<SearchHit> search(const std::string& query, int num) = 0;
};

/// One billable "search" call per query. Hits are renumbered 1..n and hits
/// with invalid links are dropped.
class SearchClient {
 public:
  SearchClient(std::shared_ptr<SearchBackend> backend, std::shared_ptr<CallGuard> guard, int top_k = 10);

  /// Throws EmptyQuery for a blank query and ProviderUnavailable when the
  /// provider stays down.
  SearchResult search_one(const std::string& query, const CancelToken* cancel = nullptr) const;

  /// One result per query in input order. A query that fails after retries
  /// carries an error instead of failing the batch; EmptyQuery is checked for
  /// every query before any call is made.
  std::vector<SearchResult> search(const std::vector<std::string>& queries, const CancelToken* cancel = nullptr) const;

  int top_k() const noexcept { return top_k_; }

 private:
  std::shared_ptr<SearchBackend> backend_;
  std::shared_ptr<CallGuard> guard_;
  int top_k_;
};

}  // namespace deepforge

// SPDX-License-Identifier: Apache-2.0
#include "deepforge/providers/search.hpp"

#include "deepforge/common/text.hpp"
#include "deepforge/providers/url.hpp"

namespace deepforge {

void to_json(nlohmann::json& j, const SearchHit& h) {
  j = nlohmann::json{{"title", h.title}, {"link", h.link}, {"snippet", h.snippet}, {"position", h.position}};
}

void to_json(nlohmann::json& j, const SearchResult& r) {
  j = nlohmann::json{{"query", r.query}, {"hits", r.hits}};
  if (r.error) j["error"] = *r.error;
}

SearchClient::SearchClient(std::shared_ptr<SearchBackend> backend, std::shared_ptr<CallGuard> guard, int top_k)
    : backend_(std::move(backend)), guard_(std::move(guard)), top_k_(top_k) {
  if (top_k_ < 1) throw PreconditionError("search.top_k must be >= 1");
}

SearchResult SearchClient::search_one(const std::string& query, const CancelToken* cancel) const {
  if (text::trim_view(query).empty()) throw ProviderError("EmptyQuery", "search query is empty");
  auto raw = guard_->run([&] { return backend_->search(query, top_k_); }, cancel);
  SearchResult result;
  result.query = query;
  for (auto& hit : raw) {
    if (static_cast<int>(result.hits.size()) >= top_k_) break;
    if (!is_valid_url(hit.link)) continue;
    hit.position = static_cast<int>(result.hits.size()) + 1;
    result.hits.push_back(std::move(hit));
  }
  return result;
}

std::vector<SearchResult> SearchClient::search(const std::vector<std::string>& queries, const CancelToken* cancel) const {
  for (const auto& q : queries) {
    if (text::trim_view(q).empty()) throw ProviderError("EmptyQuery", "search query is empty");
  }
  std::vector<SearchResult> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    try {
      out.push_back(search_one(q, cancel));
    } catch (const ProviderError& e) {
      if (e.kind() == "Cancelled") throw;
      out.push_back(SearchResult{q, {}, std::string(e.what())});
    }
  }
  return out;
}

}  // namespace deepforge

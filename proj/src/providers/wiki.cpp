// SPDX-License-Identifier: Apache-2.0
#include "deepforge/providers/wiki.hpp"

#include "deepforge/common/text.hpp"

namespace deepforge {

void to_json(nlohmann::json& j, const WikiEntry& e) {
  j = nlohmann::json{{"name", e.name}};
  if (e.title) j["title"] = *e.title;
  if (e.text) j["text"] = *e.text;
  if (e.not_found) j["not_found"] = true;
  if (e.error) j["error"] = *e.error;
}

WikiClient::WikiClient(std::shared_ptr<WikiBackend> backend, std::shared_ptr<CallGuard> guard)
    : backend_(std::move(backend)), guard_(std::move(guard)) {}

std::vector<WikiEntry> WikiClient::lookup(const std::vector<std::string>& names, const CancelToken* cancel) const {
  std::vector<WikiEntry> out;
  out.reserve(names.size());
  for (const auto& name : names) {
    WikiEntry entry;
    entry.name = name;
    if (text::trim_view(name).empty()) {
      entry.not_found = true;
      out.push_back(std::move(entry));
      continue;
    }
    try {
      auto article = guard_->run([&] { return backend_->lookup(name); }, cancel);
      if (article) {
        entry.title = article->title;
        entry.text = article->text;
      } else {
        entry.not_found = true;
      }
    } catch (const ProviderError& e) {
      if (e.kind() == "Cancelled") throw;
      entry.error = e.what();
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace deepforge

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepforge/providers/call_guard.hpp"

namespace deepforge {

struct WikiArticle {
  std::string title;
  std::string text;
};

/// One entry per requested name. Exactly one of `text` (with `title`),
/// `not_found`, or `error` describes the outcome.
struct WikiEntry {
  std::string name;
  std::optional<std::string> title;
  std::optional<std::string> text;
  bool not_found = false;
  std::optional<std::string> error;
  friend bool operator==(const WikiEntry&, const WikiEntry&) = default;
};

void to_json(nlohmann::json& j, const WikiEntry& e);

class WikiBackend {
 public:
  virtual ~WikiBackend() = default;
  /// nullopt when no article exists.
  virtual std::optional<WikiArticle> lookup(const std::string& name) = 0;
};

/// The ledger counts this provider as "wiki", one call per entity.
class WikiClient {
 public:
  WikiClient(std::shared_ptr<WikiBackend> backend, std::shared_ptr<CallGuard> guard);

  std::vector<WikiEntry> lookup(const std::vector<std::string>& names, const CancelToken* cancel = nullptr) const;

 private:
  std::shared_ptr<WikiBackend> backend_;
  std::shared_ptr<CallGuard> guard_;
};

}  // namespace deepforge

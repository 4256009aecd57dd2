// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "deepforge/datamodel/types.hpp"
#include "deepforge/providers/fetch.hpp"
#include "deepforge/providers/sandbox.hpp"
#include "deepforge/providers/search.hpp"
#include "deepforge/providers/wiki.hpp"

namespace deepforge {

/// What the offline world knows about one entity.
struct EntityProfile {
  std::string name;
  std::string description;
  std::string kind;  // "organization", "person", "item", "famous", ...
  Language language = Language::En;
  std::vector<std::string> facts;
  std::map<std::string, std::string> relations;
  std::string wiki_text;
};

struct NounInfo {
  std::string noun;
  std::string slug;
  std::vector<std::string> entities;
};

/// Deterministic offline web. Hand-authored entities, pages and search
/// results come from an embedded fixture; everything else (organizations and
/// people with syllable names, their pages and articles) is generated from
/// name hashes, so the world is unbounded but stateless.
///
/// URL space: https://web.mock/<noun-slug>/<1..10> (noun pages; hit 7 lives
/// under /dead/ and returns 404, hit 9 is a PDF), https://web.mock/entity/
/// <name>/<1..3>, https://web.mock/misc/<hash>/<n>, https://wiki.mock/wiki/
/// <name>, plus fixture URLs.
class MockWorld {
 public:
  static std::shared_ptr<const MockWorld> builtin();
  static std::shared_ptr<const MockWorld> from_json(const nlohmann::json& fixture);

  const std::vector<NounInfo>& nouns() const noexcept { return nouns_; }
  const NounInfo* find_noun(std::string_view noun_or_slug) const;

  std::optional<EntityProfile> profile(std::string_view name) const;
  bool knows(std::string_view name) const { return profile(name).has_value(); }

  /// Entity names mentioned in free text, in order of first appearance.
  std::vector<std::string> find_entities(std::string_view text) const;

  std::vector<SearchHit> search(std::string_view query, int num) const;
  FetchedDocument fetch(std::string_view url) const;
  std::optional<WikiArticle> wiki(std::string_view name) const;

  /// Hand-labelled entities for a fixture page, if any.
  std::vector<std::string> answer_key(std::string_view url) const;

  static std::string entity_url(std::string_view name, int index);
  static std::string wiki_url(std::string_view name);

 private:
  MockWorld() = default;

  std::string noun_page(const NounInfo& noun, int index) const;
  std::string entity_page(const EntityProfile& p, int index) const;

  std::vector<NounInfo> nouns_;
  std::map<std::string, EntityProfile, std::less<>> authored_;
  struct Page {
    std::string content_type;
    std::string html;
    std::vector<std::string> answer_key;
  };
  std::map<std::string, Page, std::less<>> pages_;
  struct SearchOverride {
    std::vector<std::string> keywords;
    std::vector<SearchHit> hits;
  };
  std::vector<SearchOverride> search_overrides_;
  std::map<std::string, std::string> famous_relations_;
};

/// Procedural name helpers, exposed for tests.
namespace mockgen {
std::string org_name(std::uint64_t h);
std::string person_name(std::uint64_t h);
bool is_org_name(std::string_view name);
bool is_person_name(std::string_view name);
}  // namespace mockgen

class MockSearchBackend : public SearchBackend {
 public:
  explicit MockSearchBackend(std::shared_ptr<const MockWorld> world) : world_(std::move(world)) {}
  std::vector<SearchHit> search(const std::string& query, int num) override { return world_->search(query, num); }

 private:
  std::shared_ptr<const MockWorld> world_;
};

class MockFetchBackend : public FetchBackend {
 public:
  explicit MockFetchBackend(std::shared_ptr<const MockWorld> world) : world_(std::move(world)) {}
  FetchedDocument fetch(const std::string& url) override { return world_->fetch(url); }

 private:
  std::shared_ptr<const MockWorld> world_;
};

class MockWikiBackend : public WikiBackend {
 public:
  explicit MockWikiBackend(std::shared_ptr<const MockWorld> world) : world_(std::move(world)) {}
  std::optional<WikiArticle> lookup(const std::string& name) override { return world_->wiki(name); }

 private:
  std::shared_ptr<const MockWorld> world_;
};

}  // namespace deepforge

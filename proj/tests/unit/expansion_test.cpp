// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>

#include "deepforge/common/text.hpp"
#include "deepforge/datamodel/jsonl.hpp"
#include "deepforge/expansion/expansion.hpp"
#include "test_support.hpp"

using namespace deepforge;
using nlohmann::json;

namespace {

std::vector<std::string> names(const std::vector<Entity>& entities) {
  std::vector<std::string> out;
  for (const auto& e : entities) out.push_back(e.name);
  return out;
}

class ListSearch : public SearchBackend {
 public:
  std::vector<SearchHit> hits;
  std::vector<SearchHit> search(const std::string&, int num) override {
    return {hits.begin(), hits.begin() + std::min<std::size_t>(hits.size(), static_cast<std::size_t>(num))};
  }
};

std::shared_ptr<CallGuard> search_guard() {
  return std::make_shared<CallGuard>("search", GuardOptions{}, std::make_shared<CostLedger>(), dftest::no_sleep());
}

}  // namespace

TEST(Nouns, CleansNumberingAndBullets) {
  EXPECT_EQ(clean_noun_lines("1. apple\n2. river"), (std::vector<std::string>{"apple", "river"}));
  EXPECT_EQ(clean_noun_lines("- kettle\n* harbor\n3) violin\n\n  "), (std::vector<std::string>{"kettle", "harbor", "violin"}));
}

TEST(Nouns, SkipsExcludedAndCapsAtBatchSize) {
  auto scripted = std::make_shared<ScriptedChatBackend>(
      std::vector<std::string>{"1. apple\n2. river\n3. lantern\n4. kettle\n5. harbor\n6. violin\n7. glacier"});
  auto chat = dftest::chat_client(scripted);
  const auto nouns = generate_noun_batch(*chat, 5, {"apple", "river"}, 1);
  EXPECT_EQ(nouns, (std::vector<std::string>{"lantern", "kettle", "harbor", "violin", "glacier"}));
}

TEST(Nouns, ZeroBatchMakesNoCall) {
  auto scripted = std::make_shared<ScriptedChatBackend>(std::vector<std::string>{});
  auto chat = dftest::chat_client(scripted);
  EXPECT_TRUE(generate_noun_batch(*chat, 0, {}, 1).empty());
  EXPECT_EQ(scripted->call_count(), 0u);
}

TEST(Nouns, AllExcludedIsDegenerate) {
  auto chat = dftest::chat_client(std::make_shared<ScriptedChatBackend>(std::vector<std::string>{"Apple\napple\n RIVER"}));
  try {
    generate_noun_batch(*chat, 3, {"apple", "river"}, 1);
    FAIL();
  } catch (const ExpansionError& e) {
    EXPECT_EQ(e.kind(), "DegenerateBatch");
  }
}

TEST(SeedUrls, FirstUniqueLinksInOrder) {
  auto backend = std::make_shared<ListSearch>();
  for (int i = 1; i <= 10; ++i) backend->hits.push_back({"t", "https://example.org/" + std::to_string(i), "s", i});
  SearchClient client(backend, search_guard(), 10);
  EXPECT_EQ(collect_seed_urls(client, "lantern", 5),
            (std::vector<std::string>{"https://example.org/1", "https://example.org/2", "https://example.org/3",
                                      "https://example.org/4", "https://example.org/5"}));
  backend->hits = {{"a", "https://example.org/x", "", 1}, {"b", "https://example.org/x", "", 2},
                   {"c", "https://example.org/y", "", 3}};
  EXPECT_EQ(collect_seed_urls(client, "lantern", 5),
            (std::vector<std::string>{"https://example.org/x", "https://example.org/y"}));
  backend->hits.clear();
  EXPECT_TRUE(collect_seed_urls(client, "lantern", 5).empty());
}

TEST(Extraction, LineFormat) {
  const auto entities = parse_extraction("- Sword in the Stone | consumable item\n2. Lanternfall\n\n", "indie game",
                                         "https://web.mock/indie-game/1");
  ASSERT_EQ(entities.size(), 2u);
  EXPECT_EQ(entities[0].name, "Sword in the Stone");
  EXPECT_EQ(entities[0].description, std::optional<std::string>("consumable item"));
  EXPECT_EQ(entities[0].origin_noun, std::optional<std::string>("indie game"));
  EXPECT_EQ(entities[0].source_url, std::optional<std::string>("https://web.mock/indie-game/1"));
  EXPECT_EQ(entities[1].name, "Lanternfall");
  EXPECT_FALSE(entities[1].description.has_value());
  EXPECT_TRUE(parse_extraction("", "n", "https://example.org").empty());
}

TEST(Extraction, MalformedLines) {
  for (const char* bad : {" | no name", "a | b | c"}) {
    try {
      parse_extraction(bad, "n", "https://example.org");
      FAIL() << bad;
    } catch (const ExpansionError& e) {
      EXPECT_EQ(e.kind(), "MalformedExtraction");
    }
  }
}

TEST(Extraction, IndieGamePageFindsAnswerKey) {
  const ProviderSet p = dftest::mock_providers();
  const std::string url = "https://web.mock/indie-game/1";
  const std::string page = p.fetch->fetch_and_clean(url);
  const auto found = names(extract_entities(*p.chat, page, "indie game", url, 3));
  const auto key = p.world->answer_key(url);
  ASSERT_FALSE(key.empty());
  for (const auto& expected : key) {
    EXPECT_NE(std::find(found.begin(), found.end(), expected), found.end()) << expected;
  }
}

TEST(Dedup, NormalizationStoplistAndNoise) {
  auto e = [](std::string n) { return Entity{std::move(n), std::nullopt, std::nullopt, std::nullopt}; };
  EXPECT_EQ(names(dedup_and_filter({e("Paris"), e("paris"), e("Paris ")}, {}).entities),
            std::vector<std::string>{"Paris"});
  EXPECT_EQ(names(dedup_and_filter({e("click here"), e("Paris")}, default_stoplist()).entities),
            std::vector<std::string>{"Paris"});
  EXPECT_EQ(names(dedup_and_filter({e("x"), e("2004"), e("Igor  Sysoev"), e("igor sysoev")}, {}).entities),
            std::vector<std::string>{"Igor Sysoev"});
  const SeedEntitySet empty = dedup_and_filter({}, {});
  EXPECT_TRUE(empty.entities.empty());
  EXPECT_EQ(empty.stats, SeedStats{});
}

TEST(Dedup, HighFrequencyDrop) {
  auto e = [](std::string n) { return Entity{std::move(n), std::nullopt, std::nullopt, std::nullopt}; };
  const auto kept = drop_high_frequency({e("water"), e("Quillmoth Studio")}, {"water"});
  EXPECT_EQ(names(kept), std::vector<std::string>{"Quillmoth Studio"});
}

TEST(Stage1, MockRunReachesTargetAndIsWorkerIndependent) {
  dftest::TempDir dir;
  Stage1Config c;
  c.batch_size = 4;
  c.target_pool_size = 12;
  c.seed = 11;
  c.workers = 1;
  const SeedEntitySet one = run_stage1(dftest::mock_providers(11), c, dir / "b1.jsonl", dir / "e1.jsonl");
  c.workers = 2;
  const SeedEntitySet two = run_stage1(dftest::mock_providers(11), c, dir / "b2.jsonl", dir / "e2.jsonl");
  EXPECT_GE(one.entities.size(), 12u);
  EXPECT_EQ(one, two);
  EXPECT_EQ(one.stats.entities_kept, one.entities.size());
  EXPECT_EQ(one.stats.nouns_generated, one.noun_pool.size());
  std::set<std::string> seen;
  for (const auto& noun : one.noun_pool) EXPECT_TRUE(seen.insert(text::normalize_name(noun)).second) << noun;
  std::set<std::string> unique;
  for (const auto& ent : one.entities) EXPECT_TRUE(unique.insert(text::normalize_name(ent.name)).second);
}

TEST(Stage1, ResumeAfterEveryBatchGivesTheSameSet) {
  dftest::TempDir dir;
  Stage1Config c;
  c.batch_size = 3;
  c.target_pool_size = 15;
  c.seed = 5;
  const SeedEntitySet full = run_stage1(dftest::mock_providers(5), c, dir / "b.jsonl", dir / "e.jsonl");
  const auto rows = read_json_lines(dir / "b.jsonl");
  ASSERT_GE(rows.size(), 2u);
  for (std::size_t keep = 0; keep < rows.size(); ++keep) {
    const auto batches = dir / ("b" + std::to_string(keep) + ".jsonl");
    write_json_lines(batches, std::vector<json>(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(keep)));
    // A torn half line at the end must be ignored as well.
    std::ofstream(batches, std::ios::app) << "{\"batch\":";
    const SeedEntitySet resumed = run_stage1(dftest::mock_providers(5), c, batches, dir / "r.jsonl");
    EXPECT_EQ(resumed, full) << "resumed after " << keep << " batches";
  }
}

TEST(Stage1, SingleBatchForTargetOne) {
  dftest::TempDir dir;
  Stage1Config c;
  c.target_pool_size = 1;
  run_stage1(dftest::mock_providers(), c, dir / "b.jsonl", dir / "e.jsonl");
  EXPECT_EQ(count_records(dir / "b.jsonl"), 1u);
}

TEST(Stage1, SaturationStopsWithPartialSet) {
  dftest::TempDir dir;
  auto scripted = std::make_shared<ScriptedChatBackend>([](const ChatRequest& r) -> std::string {
    if (r.purpose == "nouns") return "lantern\nkettle";
    return "";
  });
  Stage1Config c;
  c.target_pool_size = 50;
  const SeedEntitySet s = run_stage1(dftest::with_chat(scripted), c, dir / "b.jsonl", dir / "e.jsonl");
  EXPECT_TRUE(s.entities.empty());
  EXPECT_EQ(s.noun_pool, (std::vector<std::string>{"lantern", "kettle"}));
  EXPECT_EQ(count_records(dir / "b.jsonl"), 3u);
}

// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <set>
#include <thread>

#include <json.hpp>

#include "deepforge/common/config.hpp"
#include "deepforge/common/hash.hpp"
#include "deepforge/common/json_schema.hpp"
#include "deepforge/common/resources.hpp"
#include "deepforge/common/rng.hpp"
#include "deepforge/common/text.hpp"
#include "deepforge/common/worker_pool.hpp"

using namespace deepforge;
using nlohmann::json;

TEST(ConfigFile, ParseOverrideAndComments) {
  const Config c = Config::parse("# header\n a.b = 1 \n\nname = two words\na.b = 3\nflag = true\n");
  EXPECT_EQ(c.get_int("a.b"), 3);
  EXPECT_EQ(c.get_string("name"), "two words");
  EXPECT_TRUE(c.get_bool("flag", false));
  EXPECT_EQ(c.get_int("missing", 9), 9);
  EXPECT_EQ(c.get_double("a.b"), 3.0);
  EXPECT_THROW(c.get_string("missing"), ConfigError);
  EXPECT_THROW(c.get_int("name"), ConfigError);
  EXPECT_THROW(Config::parse("just words"), ConfigError);
  EXPECT_THROW(Config::parse(" = 3"), ConfigError);
}

TEST(ConfigFile, RequireNamesEveryMissingKey) {
  const Config c = Config::parse("a = 1");
  try {
    c.require({"a", "b", "c"});
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("b"), std::string::npos);
    EXPECT_NE(msg.find("c"), std::string::npos);
  }
}

TEST(ConfigFile, DumpIsCanonical) {
  const Config a = Config::parse("z = 1\na = 2");
  const Config b = Config::parse("a = 2\nz = 1");
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(Config::parse(a.dump()).entries(), a.entries());
}

TEST(Text, Basics) {
  EXPECT_EQ(text::trim("  a b \n"), "a b");
  EXPECT_EQ(text::collapse_whitespace(" a \t b\n\nc "), "a b c");
  EXPECT_EQ(text::normalize_name("  Igor   SYSOEV "), "igor sysoev");
  EXPECT_TRUE(text::is_purely_numeric("2004"));
  EXPECT_FALSE(text::is_purely_numeric("20o4"));
  EXPECT_EQ(text::split("a,,b", ','), (std::vector<std::string>{"a", "", "b"}));
  EXPECT_EQ(text::join({"a", "b"}, ", "), "a, b");
  EXPECT_EQ(text::replace_all("aaa", "a", "bb"), "bbbbbb");
  EXPECT_EQ(text::code_point_count("茶社ab"), 4u);
  EXPECT_DOUBLE_EQ(text::cjk_ratio("茶社ab"), 0.5);
  EXPECT_EQ(text::split_lines("a\r\nb\n"), (std::vector<std::string>{"a", "b"}));
}

TEST(Schema, ToolContracts) {
  const json search = tool_schema("search");
  const json params = search.at("parameters");
  EXPECT_TRUE(validate_json_schema(params, {{"query", {"a", "b"}}}).empty());
  EXPECT_FALSE(validate_json_schema(params, json::object()).empty());
  EXPECT_FALSE(validate_json_schema(params, {{"query", 5}}).empty());
  const json visit = tool_schema("visit_urls").at("parameters");
  EXPECT_TRUE(validate_json_schema(visit, {{"urls", {"https://example.org"}}, {"query", "q"}}).empty());
  for (const char* name : {"search", "visit_urls", "search_wiki", "execute_code"}) {
    EXPECT_EQ(tool_schema(name).at("name"), name);
  }
  for (const char* name : {"search_google", "crawl_url_content", "search_wiki"}) {
    EXPECT_EQ(explorer_schema(name).at("name"), name);
  }
}

TEST(Schema, Keywords) {
  const json s = {{"type", "object"},
                  {"properties",
                   {{"n", {{"type", "integer"}}},
                    {"tags", {{"type", "array"}, {"items", {{"type", "string"}}}, {"minItems", 1}, {"maxItems", 2}}},
                    {"mode", {{"enum", {"fast", "slow"}}}}}},
                  {"required", {"n"}},
                  {"additionalProperties", false}};
  EXPECT_TRUE(validate_json_schema(s, {{"n", 1}, {"tags", {"x"}}, {"mode", "fast"}}).empty());
  EXPECT_FALSE(validate_json_schema(s, {{"n", 1.5}}).empty());
  EXPECT_FALSE(validate_json_schema(s, {{"n", 1}, {"tags", json::array()}}).empty());
  EXPECT_FALSE(validate_json_schema(s, {{"n", 1}, {"tags", {"a", "b", "c"}}}).empty());
  EXPECT_FALSE(validate_json_schema(s, {{"n", 1}, {"tags", {1}}}).empty());
  EXPECT_FALSE(validate_json_schema(s, {{"n", 1}, {"mode", "medium"}}).empty());
  EXPECT_FALSE(validate_json_schema(s, {{"n", 1}, {"extra", true}}).empty());
  const json either = {{"type", {"string", "array"}}};
  EXPECT_TRUE(validate_json_schema(either, "x").empty());
  EXPECT_TRUE(validate_json_schema(either, json::array()).empty());
  EXPECT_FALSE(validate_json_schema(either, 3).empty());
}

TEST(Resources, TemplatesAndFill) {
  EXPECT_FALSE(prompt_template("qa").empty());
  EXPECT_EQ(prompt_template("qa").find("SPDX"), std::string::npos);
  try {
    prompt_template("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "UnknownResource");
  }
  EXPECT_EQ(fill_template("{a} and {\"json\": 1} {b}", {{"a", "x"}, {"b", "{a}"}}), "x and {\"json\": 1} {a}");
}

TEST(Hashing, StableSeeds) {
  EXPECT_EQ(derive_seed(7, "expand"), derive_seed(7, "expand"));
  EXPECT_NE(derive_seed(7, "expand"), derive_seed(7, "explore"));
  EXPECT_NE(derive_seed(7, "expand"), derive_seed(8, "expand"));
  EXPECT_EQ(to_hex16(0xabcULL), "0000000000000abc");
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Random, SplitmixReferenceAndRanges) {
  // First outputs of splitmix64 seeded with 0.
  Rng r(0);
  EXPECT_EQ(r.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(r.next(), 0x6e789e6aa1b965f4ULL);
  Rng u(5);
  for (int i = 0; i < 10000; ++i) {
    const double x = u.uniform();
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 1.0);
    ASSERT_LT(u.below(3), 3u);
  }
}

TEST(WorkerPool, CommitsInOrderForEveryWorkerCount) {
  for (std::size_t workers : {1u, 2u, 4u, 9u}) {
    std::vector<std::size_t> committed;
    run_ordered<std::size_t>(
        50, workers,
        [](std::size_t i) {
          std::this_thread::sleep_for(std::chrono::microseconds((i * 37) % 200));
          return i * i;
        },
        [&](std::size_t i, ItemResult<std::size_t>&& r) {
          ASSERT_TRUE(r.ok());
          EXPECT_EQ(*r.value, i * i);
          committed.push_back(i);
        });
    std::vector<std::size_t> expected(50);
    for (std::size_t i = 0; i < 50; ++i) expected[i] = i;
    EXPECT_EQ(committed, expected) << workers;
  }
}

TEST(WorkerPool, ErrorsAreItemResults) {
  std::vector<bool> ok;
  run_ordered<int>(
      4, 2,
      [](std::size_t i) -> int {
        if (i == 2) throw std::runtime_error("boom");
        return static_cast<int>(i);
      },
      [&](std::size_t, ItemResult<int>&& r) { ok.push_back(r.ok()); });
  EXPECT_EQ(ok, (std::vector<bool>{true, true, false, true}));
}

TEST(WorkerPool, CommitExceptionStopsAndPropagates) {
  std::size_t commits = 0;
  EXPECT_THROW(run_ordered<int>(
                   20, 3, [](std::size_t i) { return static_cast<int>(i); },
                   [&](std::size_t i, ItemResult<int>&&) {
                     if (i == 5) throw std::runtime_error("stop");
                     ++commits;
                   }),
               std::runtime_error);
  EXPECT_EQ(commits, 5u);
}

TEST(WorkerPool, CancelKeepsContiguousPrefix) {
  CancelToken cancel;
  std::vector<std::size_t> committed;
  run_ordered<std::size_t>(
      100, 4,
      [&](std::size_t i) {
        if (i == 10) cancel.cancel();
        return i;
      },
      [&](std::size_t i, ItemResult<std::size_t>&&) { committed.push_back(i); }, &cancel);
  EXPECT_LT(committed.size(), 100u);
  for (std::size_t i = 0; i < committed.size(); ++i) EXPECT_EQ(committed[i], i);
}

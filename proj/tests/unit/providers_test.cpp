// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>
#include <thread>

#include "deepforge/common/error.hpp"
#include "deepforge/common/text.hpp"
#include "deepforge/providers/errors.hpp"
#include "deepforge/providers/url.hpp"
#include "test_support.hpp"

using namespace deepforge;
using nlohmann::json;

namespace {

std::shared_ptr<CallGuard> guard(const std::string& name, std::shared_ptr<CostLedger> ledger, int retries = 3) {
  GuardOptions o;
  o.retry.max_retries = retries;
  return std::make_shared<CallGuard>(name, o, std::move(ledger), dftest::no_sleep());
}

class FlakySearch : public SearchBackend {
 public:
  std::vector<SearchHit> search(const std::string& query, int num) override {
    if (query == "down") throw ProviderError("ProviderUnavailable", "search backend offline", true);
    std::vector<SearchHit> hits;
    for (int i = 0; i < num + 2; ++i) {
      hits.push_back({"hit " + std::to_string(i), i == 1 ? "not a url" : "https://example.org/" + query + "/" +
                                                                             std::to_string(i),
                      "snippet", 99});
    }
    return hits;
  }
};

class StaticFetch : public FetchBackend {
 public:
  std::map<std::string, FetchedDocument> docs;
  FetchedDocument fetch(const std::string& url) override {
    auto it = docs.find(url);
    if (it == docs.end()) return {404, "text/html", ""};
    return it->second;
  }
};

}  // namespace

TEST(Ledger, PricesAndCounts) {
  CostLedger ledger;
  ledger.set_unit_price("search", 1.0);
  ledger.record("search", 1000);
  ledger.record("llm", 5);
  EXPECT_EQ(ledger.count("search"), 1000u);
  EXPECT_EQ(ledger.count("fetch"), 0u);
  EXPECT_EQ(ledger.cost_micro_usd(), 1000000);
}

TEST(Backoff, ExponentialWithJitter) {
  RetryPolicy p;
  EXPECT_EQ(backoff_delay(p, 0, 0.5).count(), 500);
  EXPECT_EQ(backoff_delay(p, 1, 0.5).count(), 1000);
  EXPECT_EQ(backoff_delay(p, 2, 0.0).count(), 1600);
  EXPECT_EQ(backoff_delay(p, 2, 1.0).count(), 2400);
}

TEST(CallGuard, RetriesThenBillsOnce) {
  auto ledger = std::make_shared<CostLedger>();
  auto scripted = std::make_shared<ScriptedChatBackend>(std::vector<std::string>{"ok"});
  scripted->fail_next(2);
  auto client = dftest::chat_client(scripted, ledger);
  EXPECT_EQ(client->ask("hi", "test", 1).text, "ok");
  EXPECT_EQ(scripted->call_count(), 3u);
  EXPECT_EQ(client->guard().attempts(), 3u);
  EXPECT_EQ(ledger->count("llm"), 1u);
}

TEST(CallGuard, GivesUpAfterRetries) {
  auto ledger = std::make_shared<CostLedger>();
  auto scripted = std::make_shared<ScriptedChatBackend>(std::vector<std::string>{"ok"});
  scripted->fail_next(4);
  auto client = dftest::chat_client(scripted, ledger);
  try {
    client->ask("hi", "test", 1);
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), "ProviderUnavailable");
  }
  EXPECT_EQ(scripted->call_count(), 4u);
  EXPECT_EQ(ledger->count("llm"), 0u);
}

TEST(CallGuard, PermanentErrorsAreNotRetried) {
  auto ledger = std::make_shared<CostLedger>();
  auto scripted = std::make_shared<ScriptedChatBackend>(std::vector<std::string>{"ok"});
  scripted->fail_next(1, false);
  auto client = dftest::chat_client(scripted, ledger);
  EXPECT_THROW(client->ask("hi", "test", 1), ProviderError);
  EXPECT_EQ(scripted->call_count(), 1u);
}

TEST(CallGuard, LedgerExactUnderConcurrency) {
  auto ledger = std::make_shared<CostLedger>();
  std::atomic<int> n{0};
  auto scripted = std::make_shared<ScriptedChatBackend>([&](const ChatRequest&) -> std::string {
    if (n.fetch_add(1) % 3 == 0) throw ProviderError("Transient", "blip", true);
    return "ok";
  });
  auto client = dftest::chat_client(scripted, ledger);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 50; ++i) client->ask("x", "test", 0);
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ledger->count("llm"), 400u);
  EXPECT_EQ(client->guard().attempts(), scripted->call_count());
}

TEST(Chat, Preconditions) {
  auto client = dftest::chat_client(std::make_shared<ScriptedChatBackend>(std::vector<std::string>{"a"}));
  EXPECT_THROW(client->chat(ChatRequest{}), PreconditionError);
  ChatRequest negative;
  negative.messages = {Message::user("x")};
  negative.temperature = -1;
  EXPECT_THROW(client->chat(negative), PreconditionError);
}

TEST(RateLimiter, SlidingWindowNeverExceeded) {
  constexpr std::size_t kLimit = 10;
  const auto window = std::chrono::milliseconds(200);
  RateLimiter limiter(kLimit, window);
  std::mutex mu;
  std::vector<SteadyClock::time_point> stamps;
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 12; ++i) {
        limiter.acquire();
        std::lock_guard<std::mutex> lock(mu);
        stamps.push_back(SteadyClock::now());
      }
    });
  }
  for (auto& t : threads) t.join();
  std::sort(stamps.begin(), stamps.end());
  for (std::size_t i = 0; i + kLimit < stamps.size(); ++i) {
    EXPECT_GE(stamps[i + kLimit] - stamps[i], window) << "window starting at call " << i;
  }
}

TEST(RateLimiter, CancelUnblocks) {
  RateLimiter limiter(1, std::chrono::seconds(30));
  limiter.acquire();
  CancelToken cancel;
  cancel.cancel();
  EXPECT_THROW(limiter.acquire(&cancel), ProviderError);
}

TEST(ConcurrencyLimiter, CapsInFlight) {
  ConcurrencyLimiter limiter(3);
  std::vector<std::thread> threads;
  for (int t = 0; t < 10; ++t) {
    threads.emplace_back([&] {
      auto permit = limiter.acquire();
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_LE(limiter.peak(), 3u);
}

TEST(Search, RenumbersDropsInvalidAndKeepsOrder) {
  auto ledger = std::make_shared<CostLedger>();
  SearchClient client(std::make_shared<FlakySearch>(), guard("search", ledger, 0), 5);
  const auto results = client.search({"alpha", "down", "beta"});
  ASSERT_EQ(results.size(), 3u);
  EXPECT_EQ(results[0].query, "alpha");
  EXPECT_EQ(results[2].query, "beta");
  ASSERT_EQ(results[0].hits.size(), 5u);
  for (std::size_t i = 0; i < results[0].hits.size(); ++i) {
    EXPECT_EQ(results[0].hits[i].position, static_cast<int>(i + 1));
    EXPECT_TRUE(is_valid_url(results[0].hits[i].link));
  }
  EXPECT_TRUE(results[1].error.has_value());
  EXPECT_TRUE(results[1].hits.empty());
  EXPECT_EQ(ledger->count("search"), 2u);
}

TEST(Search, EmptyQueryBeforeAnyCall) {
  auto ledger = std::make_shared<CostLedger>();
  SearchClient client(std::make_shared<FlakySearch>(), guard("search", ledger), 5);
  try {
    client.search({"alpha", "  "});
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), "EmptyQuery");
  }
  EXPECT_EQ(ledger->count("search"), 0u);
}

TEST(Search, MockHoneyDensity) {
  const ProviderSet p = dftest::mock_providers();
  const auto r = p.search->search_one("density of honey at 25C");
  ASSERT_FALSE(r.hits.empty());
  EXPECT_EQ(r.hits[0].title, "Honey density");
  EXPECT_FALSE(r.hits[0].snippet.empty());
  EXPECT_TRUE(is_valid_url(r.hits[0].link));
}

TEST(Fetch, HtmlToText) {
  EXPECT_EQ(html_to_text("<html><body><p>Hi</p></body></html>"), "Hi");
  const std::string text = html_to_text(
      "<html><head><title>T</title><style>p{}</style></head><body><script>var secret=1;</script>"
      "<p>A &amp; B</p><!-- hidden --><div>second   line</div><noscript>ns</noscript></body></html>");
  EXPECT_FALSE(text::contains(text, "secret"));
  EXPECT_FALSE(text::contains(text, "hidden"));
  EXPECT_FALSE(text::contains(text, "p{}"));
  EXPECT_EQ(text, "A & B\nsecond line");
}

TEST(Fetch, StatusAndContentType) {
  auto backend = std::make_shared<StaticFetch>();
  backend->docs["https://example.org/pdf"] = {200, "application/pdf", "%PDF"};
  backend->docs["https://example.org/txt"] = {200, "text/plain; charset=utf-8", "  a \n\n b  "};
  backend->docs["https://example.org/busy"] = {503, "text/html", ""};
  PageFetcher fetcher(backend, guard("fetch", std::make_shared<CostLedger>(), 1));
  EXPECT_EQ(fetcher.fetch_and_clean("https://example.org/txt"), "a\nb");
  try {
    fetcher.fetch_and_clean("https://example.org/pdf");
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), "NonHtmlContent");
  }
  try {
    fetcher.fetch_and_clean("https://example.org/missing");
    FAIL();
  } catch (const FetchFailure& e) {
    EXPECT_EQ(e.status(), 404);
  }
  try {
    fetcher.fetch_and_clean("https://example.org/busy");
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), "ProviderUnavailable");
  }
  EXPECT_THROW(fetcher.fetch_and_clean("not a url"), PreconditionError);
}

TEST(Fetch, MockNginxPageNamesCreator) {
  const ProviderSet p = dftest::mock_providers();
  const std::string text = p.fetch->fetch_and_clean(MockWorld::entity_url("Nginx", 1));
  EXPECT_TRUE(text::contains(text, "Igor Sysoev")) << text;
}

TEST(Wiki, PerEntryOutcomes) {
  const ProviderSet p = dftest::mock_providers();
  EXPECT_TRUE(p.wiki->lookup({}).empty());
  const auto entries = p.wiki->lookup({"Nginx", "NoSuchEntityXYZ"});
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].name, "Nginx");
  ASSERT_TRUE(entries[0].text.has_value());
  EXPECT_FALSE(entries[0].text->empty());
  EXPECT_TRUE(entries[1].not_found);
  EXPECT_FALSE(entries[1].text.has_value());
}

TEST(Sandbox, MockArithmetic) {
  const ProviderSet p = dftest::mock_providers();
  const ExecResult r = p.sandbox->execute_code("print(1+1)", {});
  EXPECT_EQ(r.exit, ExecExit::Ok);
  EXPECT_EQ(text::trim(r.stdout_text), "2");
  const ExecResult honey = p.sandbox->execute_code(
      "density_honey = 1.420\ndensity_mayo = 0.910\nx = (16 * (density_honey - density_mayo)) / density_honey\nprint(x)",
      {});
  EXPECT_EQ(text::trim(honey.stdout_text), "5.746478873239436");
  EXPECT_THROW(p.sandbox->execute_code("print(1)", {0.0, 10}), PreconditionError);
}

namespace {

std::optional<ExecResult> run_subprocess(const std::string& code, ExecLimits limits) {
  SubprocessOptions o;
  o.require_isolation = false;
  SubprocessSandbox sandbox(o);
  try {
    return sandbox.execute(code, limits);
  } catch (const ProviderError& e) {
    if (e.kind() == "SandboxUnavailable") return std::nullopt;
    throw;
  }
}

}  // namespace

TEST(Sandbox, SubprocessRunsPython) {
  auto r = run_subprocess("print(1+1)", {5.0, 4096});
  if (!r) GTEST_SKIP() << "no python3 interpreter";
  EXPECT_EQ(r->exit, ExecExit::Ok);
  EXPECT_EQ(r->stdout_text, "2\n");
}

TEST(Sandbox, SubprocessTimeout) {
  auto r = run_subprocess("while True:\n    pass\n", {1.0, 4096});
  if (!r) GTEST_SKIP() << "no python3 interpreter";
  EXPECT_EQ(r->exit, ExecExit::Timeout);
}

TEST(Sandbox, SubprocessTruncatesOutput) {
  auto r = run_subprocess("import sys\nsys.stdout.write('x' * (10 * 1024 * 1024))\n", {10.0, 4096});
  if (!r) GTEST_SKIP() << "no python3 interpreter";
  EXPECT_TRUE(r->truncated);
  EXPECT_TRUE(text::contains(r->stdout_text, truncation_marker(4096)));
  EXPECT_LE(r->stdout_text.size(), 4096 + truncation_marker(4096).size());
}

TEST(Sandbox, InterpreterAllowlist) {
  SubprocessOptions o;
  o.interpreter = "bash";
  o.require_isolation = false;
  SubprocessSandbox sandbox(o);
  EXPECT_THROW(sandbox.execute("echo hi", {}), ProviderError);
}

TEST(MockChat, FixtureTableByPromptHash) {
  dftest::TempDir dir;
  const std::vector<Message> prompt = {Message::user("Name three web servers.")};
  std::ofstream(dir / "table.jsonl") << json{{"request_hash", prompt_hash(prompt)}, {"response", "Nginx"}}.dump()
                                     << "\n";
  auto table = MockChatBackend::load_table(dir / "table.jsonl");
  auto backend = std::make_shared<MockChatBackend>(table, MockFallback::Error);
  ChatRequest r;
  r.messages = prompt;
  EXPECT_EQ(backend->complete(r).text, "Nginx");
  EXPECT_EQ(backend->complete(r).text, "Nginx");
  EXPECT_EQ(backend->table_hits(), 2u);
  r.messages = {Message::user("something else")};
  EXPECT_THROW(backend->complete(r), ProviderError);
  auto echo = std::make_shared<MockChatBackend>(table, MockFallback::Echo);
  EXPECT_FALSE(echo->complete(r).text.empty());
}

TEST(MockChat, PromptHashIsStable) {
  const std::vector<Message> a = {Message::system("s"), Message::user("u")};
  EXPECT_EQ(prompt_hash(a), prompt_hash(a));
  EXPECT_NE(prompt_hash(a), prompt_hash({Message::system("s"), Message::user("v")}));
  EXPECT_EQ(render_prompt(a), "<|system|>\ns\n<|user|>\nu\n");
}

TEST(Url, ParseAndEncode) {
  const auto u = parse_url("https://example.org:8443/a/b?q=1");
  ASSERT_TRUE(u.has_value());
  EXPECT_EQ(u->host, "example.org");
  EXPECT_EQ(u->port, 8443);
  EXPECT_EQ(u->target, "/a/b?q=1");
  EXPECT_FALSE(is_valid_url("ftp://example.org"));
  EXPECT_FALSE(is_valid_url("https:///x"));
  EXPECT_FALSE(is_valid_url("https://exa mple.org"));
  EXPECT_EQ(url_encode("a b/ü"), "a%20b%2F%C3%BC");
  EXPECT_EQ(url_decode(url_encode("密度 & Co")), "密度 & Co");
}

// SPDX-License-Identifier: Apache-2.0
#include "deepforge/providers/provider_set.hpp"

#include <cstdlib>

#include "deepforge/common/hash.hpp"
#include "deepforge/providers/http_backends.hpp"
#include "deepforge/providers/mock_chat.hpp"

namespace deepforge {

namespace {

constexpr const char* kProviders[] = {"llm", "search", "fetch", "wiki", "sandbox"};

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

HttpEndpoint endpoint(const Config& c, const std::string& key, const char* env_key, double timeout) {
  if (!c.has(key)) throw ConfigError("live mode needs '" + key + "'");
  return HttpEndpoint{c.get_string(key), env_key ? env_or_empty(env_key) : std::string(), timeout};
}

}  // namespace

ProviderSet make_providers(const Config& c, Sleeper sleeper) {
  ProviderSet set;
  set.mock = c.get_bool("providers.mock", true);
  set.ledger = std::make_shared<CostLedger>();
  for (const char* p : kProviders) {
    set.ledger->set_unit_price(p, c.get_double(std::string("pricing.") + p, std::string(p) == "search" ? 1.0 : 0.0));
  }

  RetryPolicy retry;
  retry.max_retries = static_cast<int>(c.get_int("retry.max_retries", 3));
  retry.base_delay = std::chrono::milliseconds(c.get_int("retry.base_ms", 500));
  retry.jitter = c.get_double("retry.jitter", 0.2);
  auto guard = [&](const std::string& p) {
    GuardOptions o;
    o.retry = retry;
    o.rate_limit_per_second = static_cast<std::size_t>(c.get_int("limits." + p + ".rate_per_second", 0));
    o.max_in_flight = static_cast<std::size_t>(c.get_int("limits." + p + ".max_in_flight", 0));
    o.jitter_seed = derive_seed(c.get_u64("run.seed", 0), p);
    return std::make_shared<CallGuard>(p, o, set.ledger, sleeper);
  };

  set.models.stage = c.get_string("llm.model", "");
  set.models.policy = c.get_string("llm.policy_model", set.models.stage);
  set.models.judge = c.get_string("llm.judge_model", set.models.stage);
  set.models.summarizer = c.get_string("llm.summarizer_model", set.models.stage);
  set.exec_limits.wall_seconds = c.get_double("sandbox.wall_seconds", 10.0);
  set.exec_limits.output_bytes = static_cast<std::size_t>(c.get_int("sandbox.output_bytes", 65536));
  const int top_k = static_cast<int>(c.get_int("search.top_k", 10));

  std::shared_ptr<ChatBackend> chat;
  std::shared_ptr<SearchBackend> search;
  std::shared_ptr<FetchBackend> fetch;
  std::shared_ptr<WikiBackend> wiki;
  std::shared_ptr<SandboxBackend> sandbox;
  if (set.mock) {
    set.world = MockWorld::builtin();
    std::map<std::string, std::string> table;
    if (c.has("mock.chat_fixtures")) table = MockChatBackend::load_table(c.get_string("mock.chat_fixtures"));
    const std::string fallback = c.get_string("mock.fallback", "simulate");
    MockFallback mode = MockFallback::Simulate;
    if (fallback == "error") {
      mode = MockFallback::Error;
    } else if (fallback == "echo") {
      mode = MockFallback::Echo;
    } else if (fallback != "simulate") {
      throw ConfigError("mock.fallback must be simulate, echo or error");
    }
    chat = std::make_shared<MockChatBackend>(std::move(table), mode, std::make_shared<SimulatedLlm>(set.world));
    search = std::make_shared<MockSearchBackend>(set.world);
    fetch = std::make_shared<MockFetchBackend>(set.world);
    wiki = std::make_shared<MockWikiBackend>(set.world);
    sandbox = std::make_shared<MockSandbox>();
  } else {
    const double timeout = c.get_double("llm.timeout_seconds", 120.0);
    chat = std::make_shared<HttpChatBackend>(endpoint(c, "llm.endpoint", "DF_LLM_API_KEY", timeout), set.models.stage);
    search = std::make_shared<HttpSearchBackend>(endpoint(c, "search.endpoint", "DF_SEARCH_API_KEY", 30.0));
    HttpEndpoint proxy;
    if (c.has("fetch.proxy")) proxy = endpoint(c, "fetch.proxy", "DF_FETCH_API_KEY", 60.0);
    fetch = std::make_shared<HttpFetchBackend>(proxy);
    wiki = std::make_shared<HttpWikiBackend>(
        HttpEndpoint{c.get_string("wiki.endpoint", "https://en.wikipedia.org/w/api.php"), "", 30.0});
    SubprocessOptions so;
    so.interpreter = c.get_string("sandbox.interpreter", so.interpreter);
    so.require_isolation = c.get_bool("sandbox.require_isolation", true);
    sandbox = std::make_shared<SubprocessSandbox>(so);
  }
  set.chat = std::make_shared<ChatClient>(chat, guard("llm"));
  set.search = std::make_shared<SearchClient>(search, guard("search"), top_k);
  set.fetch = std::make_shared<PageFetcher>(fetch, guard("fetch"));
  set.wiki = std::make_shared<WikiClient>(wiki, guard("wiki"));
  set.sandbox = std::make_shared<CodeSandbox>(sandbox, guard("sandbox"));
  return set;
}

}  // namespace deepforge

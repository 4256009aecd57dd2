// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>

#include "deepforge/common/config.hpp"
#include "deepforge/providers/call_guard.hpp"
#include "deepforge/providers/chat.hpp"
#include "deepforge/providers/fetch.hpp"
#include "deepforge/providers/mock_world.hpp"
#include "deepforge/providers/sandbox.hpp"
#include "deepforge/providers/search.hpp"
#include "deepforge/providers/wiki.hpp"

namespace deepforge {

/// Model ids per role. Empty means the backend default.
struct ModelRoles {
  std::string stage;       // noun, extraction, explorer, QA and prune prompts
  std::string policy;      // trajectory collection
  std::string judge;       // correctness, quality and scoring
  std::string summarizer;  // visit_urls page summaries
};

/// Every external dependency of a run, sharing one cost ledger. Ledger
/// provider names: llm, search, fetch, wiki, sandbox.
struct ProviderSet {
  std::shared_ptr<CostLedger> ledger;
  std::shared_ptr<ChatClient> chat;
  std::shared_ptr<SearchClient> search;
  std::shared_ptr<PageFetcher> fetch;
  std::shared_ptr<WikiClient> wiki;
  std::shared_ptr<CodeSandbox> sandbox;
  ModelRoles models;
  ExecLimits exec_limits;
  std::shared_ptr<const MockWorld> world;  // set in mock mode only
  bool mock = false;
};

/// Builds mock or live providers from config keys:
///   providers.mock, search.top_k, pricing.<provider>, retry.max_retries,
///   retry.base_ms, retry.jitter, limits.<provider>.rate_per_second,
///   limits.<provider>.max_in_flight, llm.endpoint, llm.model,
///   llm.policy_model, llm.judge_model, llm.summarizer_model,
///   llm.timeout_seconds, search.endpoint, fetch.proxy, wiki.endpoint,
///   sandbox.interpreter, sandbox.require_isolation, sandbox.wall_seconds,
///   sandbox.output_bytes, mock.chat_fixtures, mock.fallback.
/// Live mode reads API keys from DF_LLM_API_KEY, DF_SEARCH_API_KEY and
/// DF_FETCH_API_KEY and throws ConfigError when an endpoint is missing.
ProviderSet make_providers(const Config& config, Sleeper sleeper = {});

}  // namespace deepforge

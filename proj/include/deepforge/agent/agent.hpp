// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepforge/common/worker_pool.hpp"
#include "deepforge/curation/tokenizer.hpp"
#include "deepforge/datamodel/types.hpp"
#include "deepforge/providers/provider_set.hpp"

namespace deepforge {

using ToolDispatcher = std::function<std::string(const nlohmann::json& arguments, const CancelToken* cancel)>;

struct ToolSpec {
  std::string name;
  nlohmann::json schema;  // {name, description, parameters}
  ToolDispatcher dispatch;
};

/// Name -> schema plus dispatcher. Aliases resolve to a canonical name.
class ToolRegistry {
 public:
  /// Throws PreconditionError for a duplicate name or a schema without
  /// parameters.
  void add(ToolSpec spec);
  void alias(const std::string& alias, const std::string& canonical);

  const ToolSpec* find(const std::string& name) const;
  std::vector<std::string> names() const;
  /// Schemas as the system prompt lists them, one JSON object per line.
  std::string schemas_text() const;

  /// Runs the schema check, then the dispatcher. Unknown tools and invalid
  /// arguments come back as error text for the policy, never dispatched.
  std::string call(const ToolCall& call, const CancelToken* cancel = nullptr) const;

 private:
  std::map<std::string, ToolSpec> tools_;
  std::map<std::string, std::string> aliases_;
};

struct RunLimits {
  int max_turns = 50;
  std::size_t max_context_tokens = 131072;
  double per_tool_timeout_seconds = 10.0;

  /// Throws PreconditionError unless every limit is positive.
  void validate() const;
};

/// Characters of page text handed to the summarizer per url.
inline constexpr std::size_t kMaxSummaryInputChars = 20000;

/// Fetches every url and summarizes it against the query with the
/// summarizer model. One entry per url, in order: {url, summary} or
/// {url, error}.
nlohmann::json tool_visit_urls(const ProviderSet& providers, const std::vector<std::string>& urls,
                               const std::string& query, std::uint64_t seed, const CancelToken* cancel = nullptr);

/// search, visit_urls, search_wiki and execute_code over the provider set;
/// code_execution is accepted as an alias of execute_code.
ToolRegistry standard_registry(const ProviderSet& providers, const RunLimits& limits, std::uint64_t seed);

struct AgentTask {
  std::string task_id;
  int rollout_index = 0;
  std::string query;
  std::optional<std::string> gold_answer;
  std::uint64_t seed = 0;
};

struct AgentStats {
  int policy_calls = 0;
  int repairs = 0;
  std::size_t peak_context_tokens = 0;
};

/// The ReAct loop. Every outcome is encoded in Trajectory::status; only
/// cancellation escapes as an exception.
Trajectory run_agent(const AgentTask& task, const ChatClient& policy, const ToolRegistry& registry,
                     const RunLimits& limits, const Tokenizer& tokenizer, const std::string& model = {},
                     double temperature = 0.0, AgentStats* stats = nullptr, const CancelToken* cancel = nullptr);

struct SampleConfig {
  int rollouts = 4;
  std::size_t workers = 1;
  RunLimits limits;
  double temperature = 0.7;
  std::uint64_t seed = 0;
};

struct SampleResult {
  std::size_t tasks = 0;
  std::size_t trajectories = 0;
  std::map<std::string, std::size_t> by_status;
};

/// `rollouts` trajectories per pair, persisted in (task, rollout) order.
/// Resumable; a policy outage stops the stage with ProviderUnavailable after
/// the finished prefix has been committed.
SampleResult sample_trajectories(const ProviderSet& providers, const std::vector<QAPair>& tasks,
                                 const SampleConfig& config, const Tokenizer& tokenizer,
                                 const std::filesystem::path& out_path, const CancelToken* cancel = nullptr);

}  // namespace deepforge

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "deepforge/common/error.hpp"
#include "deepforge/common/worker_pool.hpp"
#include "deepforge/datamodel/types.hpp"
#include "deepforge/providers/provider_set.hpp"

namespace deepforge {

/// Kinds: MalformedQaResponse, EmptyGraph.
class QaError : public Error {
 public:
  QaError(std::string kind, const std::string& detail) : Error(std::move(kind), detail) {}
};

inline constexpr std::size_t kMinQuestionChars = 20;
inline constexpr std::size_t kMaxQuestionChars = 2000;

/// Graph records as the QA prompt shows them, one JSON object per entity.
std::string serialize_graph_for_prompt(const EntityGraph& graph);

/// Content of the first <tag>...</tag> span, trimmed; nullopt when absent.
std::optional<std::string> extract_block(std::string_view text, std::string_view tag);

/// One QA prompt round (plus one repair when the <question> or <answer>
/// block is missing). Provenance is taken from the graph.
QAPair generate_qa(const ChatClient& chat, const EntityGraph& graph, std::uint64_t seed, const std::string& model = {},
                   const CancelToken* cancel = nullptr);

/// A rewrite that changes the answer or empties the question is discarded:
/// the original comes back with pruned=false.
QAPair prune_clues(const ChatClient& chat, const QAPair& qa, std::uint64_t seed, const std::string& model = {},
                   const CancelToken* cancel = nullptr);

struct QaVerdict {
  bool accepted = true;
  std::string reason;  // EmptyField, TooShort, TooLong, AnswerLeak, JudgeRejected, JudgeProtocol
  std::string detail;
};

/// Deterministic checks only.
QaVerdict check_qa_rules(const QAPair& qa);

/// Deterministic checks, then the LLM principle check when `chat` is given.
/// If the LLM is unavailable the deterministic verdict stands.
QaVerdict validate_qa(const ChatClient* chat, const QAPair& qa, std::uint64_t seed, const std::string& model = {},
                      const CancelToken* cancel = nullptr);

struct Stage2Config {
  std::size_t workers = 1;
  bool prune = true;
  bool validate = true;
  std::uint64_t seed = 0;
};

struct Stage2Result {
  std::size_t graphs = 0;
  std::size_t accepted = 0;
  std::size_t failed = 0;
  std::map<std::string, std::size_t> rejected;  // by reason
};

/// generate, prune and validate per graph; accepted pairs are appended to
/// `out_path` in graph order. Resumable through a progress journal.
Stage2Result run_stage2(const ProviderSet& providers, const std::vector<EntityGraph>& graphs,
                        const Stage2Config& config, const std::filesystem::path& out_path,
                        const CancelToken* cancel = nullptr);

}  // namespace deepforge

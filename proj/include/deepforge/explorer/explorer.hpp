// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "deepforge/common/error.hpp"
#include "deepforge/common/worker_pool.hpp"
#include "deepforge/datamodel/types.hpp"
#include "deepforge/providers/provider_set.hpp"

namespace deepforge {

/// Kinds: InvalidDistribution, NoResultBlock, MissingKey, WrongType,
/// MalformedResult, BudgetExhausted, ProtocolViolation.
class ExplorerError : public Error {
 public:
  ExplorerError(std::string kind, const std::string& detail) : Error(std::move(kind), detail) {}
};

struct DepthDistribution {
  std::map<int, double> weights;
};

/// "2:0.3,3:0.5,4:0.2". Depths must be positive integers.
DepthDistribution parse_depth_dist(std::string_view spec);
void validate_depth_dist(const DepthDistribution& dist);

/// Inverse-CDF draw over ascending depths; deterministic for a seed.
int sample_depth(const DepthDistribution& dist, std::uint64_t seed);

/// Parses the JSON inside the first <result>...</result> span. The returned
/// record's entity is left empty.
EntityRecord parse_result_block(std::string_view text);

/// Up to k relation targets: names outside the high-frequency list first,
/// then the rest; each group ordered by name length, then lexicographically.
/// Targets in `exclude` and self-relations are never picked.
std::vector<std::string> select_expansion_frontier(const EntityRecord& record, std::size_t k,
                                                   const std::set<std::string>& high_frequency,
                                                   const std::set<std::string>& exclude = {});

struct ExploreBudget {
  int max_agent_turns = 8;  // per explored entity
  int max_calls = 64;       // tool dispatches per graph
};

struct ExploreOptions {
  ExploreBudget budget;
  std::size_t frontier_k = 3;
  std::set<std::string> high_frequency;
  std::uint64_t seed = 0;
};

/// What one graph exploration did, for tests and logs.
struct ExploreTrace {
  int tool_calls = 0;
  int agent_turns = 0;
  int repairs = 0;
  std::vector<std::string> dispatched;  // tool names in dispatch order
};

/// Runs the function-calling explorer on the seed, then breadth-first on the
/// selected frontier of each level until `depth` levels are built. On budget
/// exhaustion the partial graph comes back with truncated = true. Throws
/// ExplorerError when the seed itself cannot be explored.
EntityGraph explore_entity(const ProviderSet& providers, const Entity& seed, int depth, const ExploreOptions& options,
                           ExploreTrace* trace = nullptr, const CancelToken* cancel = nullptr);

struct ExploreStageConfig {
  ExploreOptions options;
  DepthDistribution depth_dist;
  std::size_t workers = 1;
  std::size_t max_seeds = 0;  // 0: all
};

struct ExploreStageResult {
  std::size_t seeds = 0;
  std::size_t graphs = 0;
  std::size_t failed = 0;
  std::size_t truncated = 0;
};

/// Explores every seed entity (W workers, ordered commit) and appends one
/// graph per successful seed to `out_path`. Resumable.
ExploreStageResult run_explore_stage(const ProviderSet& providers, const std::vector<Entity>& seeds,
                                     const ExploreStageConfig& config, const std::filesystem::path& out_path,
                                     const CancelToken* cancel = nullptr);

}  // namespace deepforge

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "deepforge/common/worker_pool.hpp"
#include "deepforge/datamodel/types.hpp"
#include "deepforge/providers/provider_set.hpp"

namespace deepforge {

inline constexpr double kMinScore = 0.0;
inline constexpr double kMaxScore = 10.0;

/// Reads {"logical_consistency", "factual_correctness", "overall_quality"}.
/// Missing, non-numeric or out-of-range values raise JudgeProtocol.
ScoreDimensions parse_score_reply(std::string_view reply);

/// One evaluator call (one retry on a protocol error).
ScoreCard score_trajectory(const ChatClient& judge, const Trajectory& t, std::uint64_t seed,
                           const std::string& model = {}, const CancelToken* cancel = nullptr);

/// One card per trajectory that scored; protocol failures are logged and
/// left out.
std::vector<ScoreCard> score_trajectories(const ChatClient& judge, const std::vector<Trajectory>& trajectories,
                                          std::uint64_t seed, const std::string& model = {},
                                          const CancelToken* cancel = nullptr);

/// Sort by (aggregate desc, trajectory id asc); top two x bottom two; keep
/// only strictly ordered pairs. Fewer than four cards give no pairs.
std::vector<PreferencePair> build_preference_pairs(const std::vector<ScoreCard>& cards);

/// Pairs for every task, tasks in order of first appearance.
std::vector<PreferencePair> build_all_pairs(const std::vector<ScoreCard>& cards);

struct ScoreStageConfig {
  std::size_t workers = 1;
  std::uint64_t seed = 0;
};

struct PairStageResult {
  std::size_t trajectories = 0;
  std::size_t scored = 0;
  std::size_t tasks = 0;
  std::size_t pairs = 0;
};

/// Scores every trajectory into `scores_path` (resumable), then writes the
/// pairs.
PairStageResult run_pair_stage(const ProviderSet& providers, const std::vector<Trajectory>& trajectories,
                               const ScoreStageConfig& config, const std::filesystem::path& scores_path,
                               const std::filesystem::path& pairs_path, const CancelToken* cancel = nullptr);

}  // namespace deepforge

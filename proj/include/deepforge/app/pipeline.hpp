// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepforge/agent/agent.hpp"
#include "deepforge/common/config.hpp"
#include "deepforge/common/error.hpp"
#include "deepforge/common/worker_pool.hpp"
#include "deepforge/curation/filters.hpp"
#include "deepforge/curation/preference.hpp"
#include "deepforge/curation/tokenizer.hpp"
#include "deepforge/expansion/expansion.hpp"
#include "deepforge/explorer/explorer.hpp"
#include "deepforge/providers/provider_set.hpp"
#include "deepforge/qa/qa.hpp"

namespace deepforge {

/// A stage stopped; its finished outputs stay on disk for a resume.
class StageFailure : public Error {
 public:
  StageFailure(const std::string& stage, const std::string& detail)
      : Error("StageFailure", "StageFailure(" + stage + ")", detail), stage_(stage) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

inline const std::vector<std::string> kStageNames = {"expand", "explore", "genqa", "collect", "filter", "dpo-pairs"};

/// Every stage parameter, parsed and range-checked from the flat config.
struct PipelineSettings {
  std::uint64_t seed = 0;
  Stage1Config expand;
  ExploreStageConfig explore;
  Stage2Config genqa;
  SampleConfig collect;
  FilterConfig filter;
  ScoreStageConfig score;
  TokenizerHandle tokenizer;
  bool pairs_from_kept = false;

  /// Throws ConfigError for unknown keys, ill-typed values and values out of
  /// range, before any work starts.
  static PipelineSettings from_config(const Config& config);
};

/// Keys the pipeline and the provider factory understand.
const std::vector<std::string>& known_config_keys();

/// File names inside a run directory.
struct RunLayout {
  std::filesystem::path dir;

  std::filesystem::path seeds() const { return dir / "seeds.jsonl"; }
  std::filesystem::path noun_batches() const { return dir / "noun_batches.jsonl"; }
  std::filesystem::path graphs() const { return dir / "graphs.jsonl"; }
  std::filesystem::path qa() const { return dir / "qa.jsonl"; }
  std::filesystem::path trajectories() const { return dir / "trajectories.jsonl"; }
  std::filesystem::path verdicts() const { return dir / "verdicts.jsonl"; }
  std::filesystem::path kept() const { return dir / "kept.jsonl"; }
  std::filesystem::path scores() const { return dir / "scores.jsonl"; }
  std::filesystem::path pairs() const { return dir / "pairs.jsonl"; }
  std::filesystem::path difficulty_csv() const { return dir / "difficulty.csv"; }
  std::filesystem::path report() const { return dir / "report.json"; }
  // Calls spent per stage, summed over invocations; calls in flight at a hard kill are lost.
  std::filesystem::path usage() const { return dir / "usage.json"; }
  std::filesystem::path config_snapshot() const { return dir / "config.txt"; }
  std::filesystem::path manifest(const std::string& stage) const { return dir / "manifests" / (stage + ".json"); }
};

struct RunOutcome {
  nlohmann::json report;
  std::vector<std::string> ran;      // stages executed by this invocation
  bool already_complete = false;     // every stage was complete on entry
};

/// Runs the stages in order, skipping those whose manifest says complete and
/// resuming a partially written one. Stops after `stop_after` if given.
/// Throws ConfigError, StageFailure or ProviderError("ProviderUnavailable").
RunOutcome run_pipeline(const Config& config, const std::filesystem::path& run_dir,
                        const std::optional<std::string>& stop_after = std::nullopt,
                        const CancelToken* cancel = nullptr, Sleeper sleeper = {});

/// Report assembled from the artifacts and stage manifests on disk.
nlohmann::json build_report(const RunLayout& layout);

}  // namespace deepforge

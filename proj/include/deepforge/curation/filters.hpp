// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepforge/common/error.hpp"
#include "deepforge/common/worker_pool.hpp"
#include "deepforge/curation/tokenizer.hpp"
#include "deepforge/datamodel/types.hpp"
#include "deepforge/providers/provider_set.hpp"

namespace deepforge {

/// Pipeline order is the enum order.
enum class FilterStage { InvalidToolResult, FormatError, TokenLength, AnswerIncorrect, QualityUnqualified };

inline constexpr FilterStage kFilterOrder[] = {FilterStage::InvalidToolResult, FilterStage::FormatError,
                                               FilterStage::TokenLength, FilterStage::AnswerIncorrect,
                                               FilterStage::QualityUnqualified};

std::string to_string(FilterStage s);
FilterStage parse_filter_stage(std::string_view s);

struct FilterVerdict {
  std::string trajectory_id;
  bool passed = true;
  std::optional<FilterStage> failed_stage;
  std::string details;

  friend bool operator==(const FilterVerdict&, const FilterVerdict&) = default;
};

void to_json(nlohmann::json& j, const FilterVerdict& v);
void from_json(const nlohmann::json& j, FilterVerdict& v);

/// Raised when a judge reply cannot be read as the requested verdict.
class JudgeProtocol : public Error {
 public:
  explicit JudgeProtocol(const std::string& detail) : Error("JudgeProtocol", detail) {}
};

/// JSON object from a judge reply: the body of a ```json fence if present,
/// else the outermost braces. Comments are tolerated.
std::optional<nlohmann::json> parse_judge_json(std::string_view reply);

struct StageCheck {
  bool pass = true;
  std::string details;
};

/// Provider error markers and HTTP failure markers as they appear in tool
/// observations.
std::vector<std::string> default_error_patterns();

StageCheck filter_invalid_tool_results(const Trajectory& t, const std::vector<std::string>& patterns);
StageCheck filter_format(const Trajectory& t);

inline constexpr std::size_t kMinTrajectoryTokens = 8192;
inline constexpr std::size_t kMaxTrajectoryTokens = 131072;

/// Token count of render_trajectory(t), accepted within [min, max].
StageCheck filter_token_length(const Trajectory& t, const Tokenizer& tok, std::size_t min_tokens = kMinTrajectoryTokens,
                               std::size_t max_tokens = kMaxTrajectoryTokens);

struct CorrectnessVerdict {
  bool equivalent = false;
  bool fast_path = false;
};

/// Normalized exact match short-cuts the judge. Otherwise the judge must
/// answer yes or no; one retry, then JudgeProtocol.
CorrectnessVerdict judge_correctness(const ChatClient* judge, const std::string& question, const std::string& gold,
                                     const std::string& answer, std::uint64_t seed, const std::string& model = {},
                                     const CancelToken* cancel = nullptr);

struct QualityVerdict {
  bool qualified = false;
  std::string reason;
  std::vector<std::string> issues;
};

/// Reads the quality judge's JSON (fenced or bare, comments allowed). Issues
/// must be empty exactly when qualified.
QualityVerdict parse_quality_verdict(std::string_view reply);

QualityVerdict judge_quality(const ChatClient& judge, const Trajectory& t, std::uint64_t seed,
                             const std::string& model = {}, const CancelToken* cancel = nullptr);

struct FilterConfig {
  std::vector<std::string> error_patterns = default_error_patterns();
  std::size_t min_tokens = kMinTrajectoryTokens;
  std::size_t max_tokens = kMaxTrajectoryTokens;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
};

/// Stages in order with short-circuit. Judge protocol errors reject at the
/// stage that raised them; provider outages propagate.
FilterVerdict filter_trajectory(const ProviderSet& providers, const Trajectory& t, const FilterConfig& config,
                                const Tokenizer& tok, const CancelToken* cancel = nullptr);

struct FilterOutcome {
  std::vector<FilterVerdict> verdicts;
  std::vector<Trajectory> kept;
  std::map<std::string, std::size_t> rejected_by_stage;
};

FilterOutcome run_filter_pipeline(const ProviderSet& providers, const std::vector<Trajectory>& trajectories,
                                  const FilterConfig& config, const Tokenizer& tok,
                                  const CancelToken* cancel = nullptr);

/// Persists one verdict per input (resumable), then writes the kept set.
FilterOutcome run_filter_stage(const ProviderSet& providers, const std::vector<Trajectory>& trajectories,
                               const FilterConfig& config, const Tokenizer& tok,
                               const std::filesystem::path& kept_path, const std::filesystem::path& verdicts_path,
                               const CancelToken* cancel = nullptr);

}  // namespace deepforge

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deepforge/datamodel/types.hpp"

namespace deepforge {

/// Tool-call count distribution. `mean_turns` is empty when n == 0.
struct DifficultyStats {
  std::map<int, std::size_t> histogram;
  std::size_t n = 0;
  std::optional<double> mean_turns;

  friend bool operator==(const DifficultyStats&, const DifficultyStats&) = default;
};

/// Number of assistant ToolCall segments (the message structure, not the
/// stored counter).
int count_tool_calls(const Trajectory& t);

DifficultyStats stats_from_counts(const std::vector<int>& counts);
DifficultyStats difficulty_stats(const std::vector<Trajectory>& trajectories);

/// Mean recomputed from the histogram; empty when it is empty.
std::optional<double> histogram_mean(const std::map<int, std::size_t>& histogram);

/// "tool_calls,frequency" rows in ascending order.
std::string stats_to_csv(const DifficultyStats& stats);
/// Throws Error("SchemaMismatch") for malformed rows.
DifficultyStats stats_from_csv(std::string_view csv);

struct CostEstimate {
  std::int64_t n_calls = 0;
  std::int64_t micro_usd = 0;

  double usd() const noexcept { return static_cast<double>(micro_usd) / 1e6; }
  friend bool operator==(const CostEstimate&, const CostEstimate&) = default;
};

inline constexpr double kDefaultCallsPerTask = 15.0;
inline constexpr double kDefaultUsdPer1000Calls = 1.0;

/// n_calls = round(n_tasks * calls_per_task); cost = n_calls / 1000 x price,
/// kept in integer micro-USD. Negative arguments raise PreconditionError.
CostEstimate estimate_api_cost(std::int64_t n_tasks, double calls_per_task = kDefaultCallsPerTask,
                               double usd_per_1000 = kDefaultUsdPer1000Calls);
CostEstimate estimate_calls_cost(std::int64_t n_calls, double usd_per_1000 = kDefaultUsdPer1000Calls);

/// "$150.00"; rounds half away from zero to the cent.
std::string format_usd(std::int64_t micro_usd);

}  // namespace deepforge

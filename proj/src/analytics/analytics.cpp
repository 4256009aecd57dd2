// SPDX-License-Identifier: Apache-2.0
#include "deepforge/analytics/analytics.hpp"

#include <charconv>
#include <cmath>

#include "deepforge/common/error.hpp"
#include "deepforge/common/text.hpp"

namespace deepforge {

int count_tool_calls(const Trajectory& t) {
  int n = 0;
  for (const auto& m : t.messages) {
    if (m.role != Role::Assistant) continue;
    for (const auto& s : m.segments) n += s.kind == SegmentKind::ToolCall;
  }
  return n;
}

std::optional<double> histogram_mean(const std::map<int, std::size_t>& histogram) {
  std::size_t n = 0;
  long double total = 0;
  for (const auto& [calls, freq] : histogram) {
    n += freq;
    total += static_cast<long double>(calls) * static_cast<long double>(freq);
  }
  if (n == 0) return std::nullopt;
  return static_cast<double>(total / static_cast<long double>(n));
}

DifficultyStats stats_from_counts(const std::vector<int>& counts) {
  DifficultyStats s;
  for (int c : counts) {
    if (c < 0) throw PreconditionError("tool call count " + std::to_string(c) + " is negative");
    ++s.histogram[c];
  }
  s.n = counts.size();
  s.mean_turns = histogram_mean(s.histogram);
  return s;
}

DifficultyStats difficulty_stats(const std::vector<Trajectory>& trajectories) {
  std::vector<int> counts;
  counts.reserve(trajectories.size());
  for (const auto& t : trajectories) counts.push_back(count_tool_calls(t));
  return stats_from_counts(counts);
}

std::string stats_to_csv(const DifficultyStats& stats) {
  std::string out = "tool_calls,frequency\n";
  for (const auto& [calls, freq] : stats.histogram) out += std::to_string(calls) + "," + std::to_string(freq) + "\n";
  return out;
}

DifficultyStats stats_from_csv(std::string_view csv) {
  DifficultyStats s;
  const auto lines = text::split_lines(csv);
  if (lines.empty() || text::trim(lines.front()) != "tool_calls,frequency") {
    throw Error("SchemaMismatch", "difficulty CSV must start with the header tool_calls,frequency");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string line = text::trim(lines[i]);
    if (line.empty()) continue;
    const auto cols = text::split(line, ',');
    int calls = 0;
    std::size_t freq = 0;
    auto parse = [&](const std::string& col, auto& v) {
      auto [p, ec] = std::from_chars(col.data(), col.data() + col.size(), v);
      return ec == std::errc() && p == col.data() + col.size();
    };
    if (cols.size() != 2 || !parse(cols[0], calls) || !parse(cols[1], freq) || calls < 0 || s.histogram.count(calls)) {
      throw Error("SchemaMismatch", "bad difficulty CSV row " + std::to_string(i + 1) + ": " + line);
    }
    s.histogram[calls] = freq;
    s.n += freq;
  }
  std::erase_if(s.histogram, [](const auto& kv) { return kv.second == 0; });
  s.mean_turns = histogram_mean(s.histogram);
  return s;
}

CostEstimate estimate_calls_cost(std::int64_t n_calls, double usd_per_1000) {
  if (n_calls < 0 || !(usd_per_1000 >= 0) || !std::isfinite(usd_per_1000)) {
    throw PreconditionError("call count and unit price must be >= 0");
  }
  // One call costs usd_per_1000 / 1000 USD = usd_per_1000 * 1000 micro-USD.
  const auto micro_per_call_x1000 = std::llround(usd_per_1000 * 1e6);
  const std::int64_t scaled = n_calls * micro_per_call_x1000;
  return {n_calls, (scaled + 500) / 1000};
}

CostEstimate estimate_api_cost(std::int64_t n_tasks, double calls_per_task, double usd_per_1000) {
  if (n_tasks < 0 || !(calls_per_task >= 0) || !std::isfinite(calls_per_task)) {
    throw PreconditionError("task count and calls per task must be >= 0");
  }
  return estimate_calls_cost(std::llround(static_cast<double>(n_tasks) * calls_per_task), usd_per_1000);
}

std::string format_usd(std::int64_t micro_usd) {
  const bool negative = micro_usd < 0;
  const std::int64_t cents = (std::abs(micro_usd) + 5000) / 10000;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s$%lld.%02lld", negative ? "-" : "", static_cast<long long>(cents / 100),
                static_cast<long long>(cents % 100));
  return buf;
}

}  // namespace deepforge

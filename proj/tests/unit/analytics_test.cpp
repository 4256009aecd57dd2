// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "deepforge/analytics/analytics.hpp"
#include "deepforge/common/rng.hpp"
#include "deepforge/datamodel/jsonl.hpp"
#include "deepforge/datamodel/serialize.hpp"
#include "test_support.hpp"

using namespace deepforge;

namespace {

std::vector<Trajectory> fixture_trajectories() {
  std::vector<Trajectory> out;
  for (const auto& row : read_json_lines(dftest::fixture_path("difficulty_50.jsonl"))) out.push_back(row.get<Trajectory>());
  return out;
}

}  // namespace

TEST(Difficulty, SmallExample) {
  const DifficultyStats s = stats_from_counts({2, 4, 6});
  EXPECT_EQ(s.n, 3u);
  EXPECT_EQ(s.mean_turns, std::optional<double>(4.0));
  EXPECT_EQ(s.histogram, (std::map<int, std::size_t>{{2, 1}, {4, 1}, {6, 1}}));
}

TEST(Difficulty, EmptyHasNoMean) {
  const DifficultyStats s = stats_from_counts({});
  EXPECT_EQ(s.n, 0u);
  EXPECT_FALSE(s.mean_turns.has_value());
  EXPECT_FALSE(histogram_mean({}).has_value());
  EXPECT_THROW(stats_from_counts({-1}), PreconditionError);
}

TEST(Difficulty, FixtureMeanAndHistogram) {
  const auto trajectories = fixture_trajectories();
  ASSERT_EQ(trajectories.size(), 50u);
  const DifficultyStats s = difficulty_stats(trajectories);
  EXPECT_EQ(s.n, 50u);
  EXPECT_EQ(s.mean_turns, std::optional<double>(261.0 / 50.0));
  const std::map<int, std::size_t> expected = {{0, 1}, {1, 4}, {2, 6}, {3, 7}, {4, 8}, {5, 5},
                                               {6, 4}, {7, 2}, {8, 2}, {9, 7}, {11, 2}, {14, 2}};
  EXPECT_EQ(s.histogram, expected);
  EXPECT_DOUBLE_EQ(*histogram_mean(s.histogram), 5.22);
}

TEST(Difficulty, CountsStructureNotStoredCounter) {
  Trajectory t = fixture_trajectories().at(1);
  const int real = count_tool_calls(t);
  t.tool_call_count = real + 5;
  EXPECT_EQ(count_tool_calls(t), real);
  EXPECT_EQ(difficulty_stats({t}).histogram, (std::map<int, std::size_t>{{real, 1}}));
}

TEST(Difficulty, CsvRoundTrip) {
  const DifficultyStats s = difficulty_stats(fixture_trajectories());
  const std::string csv = stats_to_csv(s);
  EXPECT_EQ(csv.rfind("tool_calls,frequency\n0,1\n1,4\n", 0), 0u) << csv;
  const DifficultyStats back = stats_from_csv(csv);
  EXPECT_EQ(back, s);
  EXPECT_EQ(stats_to_csv(back), csv);
  EXPECT_EQ(stats_from_csv(stats_to_csv(DifficultyStats{})), DifficultyStats{});
}

TEST(Difficulty, CsvRejectsMalformedRows) {
  for (const char* bad : {"tool_calls,frequency\n1\n", "tool_calls,frequency\nx,2\n", "tool_calls,frequency\n1,-2\n",
                          "calls,freq\n1,2\n", "tool_calls,frequency\n1,2\n1,3\n"}) {
    try {
      stats_from_csv(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), "SchemaMismatch") << bad;
    }
  }
}

TEST(Cost, WorkedExamples) {
  const CostEstimate thousand = estimate_calls_cost(1000);
  EXPECT_EQ(thousand.micro_usd, 1'000'000);
  EXPECT_EQ(format_usd(thousand.micro_usd), "$1.00");
  const CostEstimate run = estimate_api_cost(10'000, 15.0);
  EXPECT_EQ(run.n_calls, 150'000);
  EXPECT_EQ(run.micro_usd, 150'000'000);
  EXPECT_EQ(format_usd(run.micro_usd), "$150.00");
  EXPECT_EQ(estimate_api_cost(0).micro_usd, 0);
  EXPECT_EQ(format_usd(estimate_calls_cost(1).micro_usd), "$0.00");
  EXPECT_EQ(format_usd(5'000), "$0.01");
  EXPECT_EQ(format_usd(4'999), "$0.00");
  EXPECT_THROW(estimate_api_cost(-1), PreconditionError);
  EXPECT_THROW(estimate_calls_cost(10, -1.0), PreconditionError);
}

TEST(Cost, LinearOverRandomSplits) {
  Rng rng(314159);
  for (int i = 0; i < 100; ++i) {
    const auto total = static_cast<std::int64_t>(rng.below(5'000'000));
    const auto a = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(total) + 1));
    const CostEstimate whole = estimate_calls_cost(total);
    const CostEstimate left = estimate_calls_cost(a);
    const CostEstimate right = estimate_calls_cost(total - a);
    ASSERT_EQ(left.micro_usd + right.micro_usd, whole.micro_usd) << total << " split at " << a;
    ASSERT_EQ(whole.micro_usd, total * 1000);
  }
}

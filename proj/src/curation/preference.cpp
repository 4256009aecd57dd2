// SPDX-License-Identifier: Apache-2.0
#include "deepforge/curation/preference.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <spdlog/spdlog.h>

#include "deepforge/common/hash.hpp"
#include "deepforge/common/resources.hpp"
#include "deepforge/common/text.hpp"
#include "deepforge/curation/filters.hpp"
#include "deepforge/datamodel/journal.hpp"
#include "deepforge/datamodel/serialize.hpp"
#include "deepforge/datamodel/transcript.hpp"
#include "deepforge/providers/errors.hpp"

namespace deepforge {

using nlohmann::json;

ScoreDimensions parse_score_reply(std::string_view reply) {
  const auto j = parse_judge_json(reply);
  if (!j) throw JudgeProtocol("score reply is not JSON: " + text::preview(reply));
  auto dim = [&](const char* key) {
    if (!j->contains(key) || !(*j)[key].is_number()) throw JudgeProtocol(std::string("score lacks numeric \"") + key + "\"");
    const double v = (*j)[key].get<double>();
    if (!std::isfinite(v) || v < kMinScore || v > kMaxScore) {
      throw JudgeProtocol(std::string(key) + " = " + (*j)[key].dump() + " is outside [0, 10]");
    }
    return v;
  };
  return {dim("logical_consistency"), dim("factual_correctness"), dim("overall_quality")};
}

ScoreCard score_trajectory(const ChatClient& judge, const Trajectory& t, std::uint64_t seed, const std::string& model,
                           const CancelToken* cancel) {
  const std::string trajectory_text = render_trajectory(t);
  ChatRequest req;
  req.messages = {Message::user(fill_template(
      prompt_template("score"),
      {{"question", t.query}, {"gold", t.gold_answer.value_or("")}, {"trajectory_text", trajectory_text}}))};
  req.purpose = "score";
  req.model = model;
  req.hints = {{"gold", t.gold_answer.value_or("")},
               {"final_answer", t.final_answer.value_or("")},
               {"tool_call_count", t.tool_call_count},
               {"trajectory_text", trajectory_text}};
  for (int attempt = 0;; ++attempt) {
    req.seed = seed + static_cast<std::uint64_t>(attempt);
    try {
      return ScoreCard::make(t.id, t.task_id, parse_score_reply(judge.chat(req, cancel).text));
    } catch (const JudgeProtocol&) {
      if (attempt == 1) throw;
    }
  }
}

std::vector<ScoreCard> score_trajectories(const ChatClient& judge, const std::vector<Trajectory>& trajectories,
                                          std::uint64_t seed, const std::string& model, const CancelToken* cancel) {
  std::vector<ScoreCard> out;
  for (const auto& t : trajectories) {
    try {
      out.push_back(score_trajectory(judge, t, HashBuilder().add(seed).add("score").add(t.id).value(), model, cancel));
    } catch (const JudgeProtocol& e) {
      spdlog::warn("score: {} left unscored: {}", t.id, e.what());
    }
  }
  return out;
}

std::vector<PreferencePair> build_preference_pairs(const std::vector<ScoreCard>& cards) {
  if (cards.size() < 4) {
    if (!cards.empty()) {
      spdlog::warn("pairs: task {} has {} scored trajectories, need 4", cards.front().task_id, cards.size());
    }
    return {};
  }
  std::vector<const ScoreCard*> sorted;
  for (const auto& c : cards) sorted.push_back(&c);
  std::sort(sorted.begin(), sorted.end(), [](const ScoreCard* a, const ScoreCard* b) {
    return a->aggregate != b->aggregate ? a->aggregate > b->aggregate : a->trajectory_id < b->trajectory_id;
  });
  const std::size_t n = sorted.size();
  std::vector<PreferencePair> out;
  for (std::size_t i : {std::size_t{0}, std::size_t{1}}) {
    for (std::size_t j : {n - 2, n - 1}) {
      const ScoreCard& c = *sorted[i];
      const ScoreCard& r = *sorted[j];
      if (c.aggregate > r.aggregate) out.push_back({c.task_id, c.trajectory_id, r.trajectory_id, c.aggregate, r.aggregate});
    }
  }
  return out;
}

std::vector<PreferencePair> build_all_pairs(const std::vector<ScoreCard>& cards) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<ScoreCard>> by_task;
  for (const auto& c : cards) {
    auto [it, fresh] = by_task.try_emplace(c.task_id);
    if (fresh) order.push_back(c.task_id);
    it->second.push_back(c);
  }
  std::vector<PreferencePair> out;
  for (const auto& task : order) {
    for (auto& p : build_preference_pairs(by_task[task])) out.push_back(std::move(p));
  }
  return out;
}

PairStageResult run_pair_stage(const ProviderSet& p, const std::vector<Trajectory>& trajectories,
                               const ScoreStageConfig& config, const std::filesystem::path& scores_path,
                               const std::filesystem::path& pairs_path, const CancelToken* cancel) {
  StageJournal journal(scores_path, StageJournal::progress_path_for(scores_path));
  const std::size_t start = journal.completed();
  if (start > 0) spdlog::info("dpo-pairs: resuming at trajectory {} of {}", start, trajectories.size());

  struct Outcome {
    std::optional<ScoreCard> card;
    std::string detail;
  };
  run_ordered<Outcome>(
      trajectories.size() > start ? trajectories.size() - start : 0, config.workers,
      [&](std::size_t i) {
        const Trajectory& t = trajectories[start + i];
        Outcome out;
        try {
          out.card = score_trajectory(*p.chat, t, HashBuilder().add(config.seed).add("score").add(t.id).value(),
                                      p.models.judge, cancel);
        } catch (const JudgeProtocol& e) {
          out.detail = e.what();
        }
        return out;
      },
      [&](std::size_t i, ItemResult<Outcome>&& r) {
        if (!r.ok()) std::rethrow_exception(r.error);
        const Trajectory& t = trajectories[start + i];
        if (r.value->card) {
          journal.record(t.id, {json(*r.value->card)}, "scored");
        } else {
          spdlog::warn("dpo-pairs: {} left unscored: {}", t.id, r.value->detail);
          journal.record(t.id, {}, "failed", r.value->detail);
        }
      },
      cancel);
  if (cancel && cancel->cancelled()) throw ProviderError("Cancelled", "dpo-pairs interrupted");

  const auto cards = read_records<ScoreCard>(scores_path);
  const auto pairs = build_all_pairs(cards);
  write_records(pairs_path, pairs);
  PairStageResult result;
  result.trajectories = trajectories.size();
  result.scored = cards.size();
  std::set<std::string> tasks;
  for (const auto& c : cards) tasks.insert(c.task_id);
  result.tasks = tasks.size();
  result.pairs = pairs.size();
  return result;
}

}  // namespace deepforge

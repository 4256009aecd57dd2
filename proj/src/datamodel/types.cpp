// SPDX-License-Identifier: Apache-2.0
#include "deepforge/datamodel/types.hpp"

#include <cmath>
#include <set>

#include "deepforge/common/error.hpp"
#include "deepforge/common/hash.hpp"
#include "deepforge/common/text.hpp"

namespace deepforge {

Segment Segment::call(std::string name, nlohmann::json arguments) {
  Segment s;
  s.kind = SegmentKind::ToolCall;
  s.tool_call = ToolCall{std::move(name), std::move(arguments)};
  s.text = nlohmann::json{{"name", s.tool_call->name}, {"arguments", s.tool_call->arguments}}.dump();
  return s;
}

std::string Message::plain_text() const {
  std::string out;
  for (const auto& s : segments) out += s.text;
  return out;
}

ScoreCard ScoreCard::make(std::string trajectory_id, std::string task_id, ScoreDimensions dims) {
  ScoreCard c;
  c.trajectory_id = std::move(trajectory_id);
  c.task_id = std::move(task_id);
  c.dimensions = dims;
  c.aggregate = (dims.logical_consistency + dims.factual_correctness + dims.overall_quality) / 3.0;
  return c;
}

namespace {

[[noreturn]] void bad_enum(std::string_view what, std::string_view s) {
  throw Error("SchemaMismatch", "unknown " + std::string(what) + " \"" + std::string(s) + "\"");
}

}  // namespace

std::string to_string(Language v) { return v == Language::Zh ? "zh" : "en"; }

std::string to_string(SegmentKind v) {
  switch (v) {
    case SegmentKind::Think: return "think";
    case SegmentKind::ToolCall: return "tool_call";
    case SegmentKind::ToolResponse: return "tool_response";
    case SegmentKind::Answer: return "answer";
    case SegmentKind::Plain: return "plain";
  }
  return "plain";
}

std::string to_string(Role v) {
  switch (v) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    case Role::Tool: return "tool";
  }
  return "user";
}

std::string to_string(TrajectoryStatus v) {
  switch (v) {
    case TrajectoryStatus::Complete: return "complete";
    case TrajectoryStatus::Truncated: return "truncated";
    case TrajectoryStatus::Failed: return "failed";
  }
  return "failed";
}

Language parse_language(std::string_view s) {
  if (s == "en") return Language::En;
  if (s == "zh") return Language::Zh;
  bad_enum("language", s);
}

SegmentKind parse_segment_kind(std::string_view s) {
  if (s == "think") return SegmentKind::Think;
  if (s == "tool_call") return SegmentKind::ToolCall;
  if (s == "tool_response") return SegmentKind::ToolResponse;
  if (s == "answer") return SegmentKind::Answer;
  if (s == "plain") return SegmentKind::Plain;
  bad_enum("segment kind", s);
}

Role parse_role(std::string_view s) {
  if (s == "system") return Role::System;
  if (s == "user") return Role::User;
  if (s == "assistant") return Role::Assistant;
  if (s == "tool") return Role::Tool;
  bad_enum("role", s);
}

TrajectoryStatus parse_trajectory_status(std::string_view s) {
  if (s == "complete") return TrajectoryStatus::Complete;
  if (s == "truncated") return TrajectoryStatus::Truncated;
  if (s == "failed") return TrajectoryStatus::Failed;
  bad_enum("trajectory status", s);
}

std::vector<std::string> check_entity(const Entity& e) {
  std::vector<std::string> out;
  if (text::trim_view(e.name).empty()) out.emplace_back("entity name is empty");
  return out;
}

std::vector<std::string> check_entity_record(const EntityRecord& r) {
  std::vector<std::string> out = check_entity(r.entity);
  for (const auto& fact : r.entity_self) {
    if (text::trim_view(fact).empty()) out.emplace_back("empty fact in entity_self");
  }
  for (const auto& [name, rel] : r.entity_relations) {
    if (text::trim_view(name).empty()) out.emplace_back("empty relation target");
  }
  if (r.entity_self.empty() && r.entity_relations.empty()) {
    out.emplace_back("record has neither facts nor relations");
  }
  return out;
}

std::vector<std::string> check_entity_graph(const EntityGraph& g) {
  std::vector<std::string> out;
  if (g.depth < 0) out.emplace_back("negative depth");
  if (!g.records.contains(g.root)) out.emplace_back("root \"" + g.root + "\" missing from records");
  const std::set<std::string> frontier(g.frontier.begin(), g.frontier.end());
  for (const auto& [name, rec] : g.records) {
    for (auto& p : check_entity_record(rec)) out.push_back(name + ": " + p);
    if (rec.entity.name != name) out.push_back(name + ": record keyed under a different name");
    for (const auto& [target, rel] : rec.entity_relations) {
      if (text::normalize_name(target) == text::normalize_name(name)) {
        out.push_back(name + ": self-loop relation");
      } else if (!g.records.contains(target) && !frontier.contains(target)) {
        out.push_back(name + ": relation target \"" + target + "\" neither explored nor on the frontier");
      }
    }
  }
  return out;
}

std::vector<std::string> check_qa_pair(const QAPair& qa) {
  std::vector<std::string> out;
  if (text::trim_view(qa.question).empty()) out.emplace_back("empty question");
  if (text::trim_view(qa.answer).empty()) out.emplace_back("empty answer");
  return out;
}

std::vector<std::string> check_score_card(const ScoreCard& c) {
  std::vector<std::string> out;
  const auto& d = c.dimensions;
  for (double v : {d.logical_consistency, d.factual_correctness, d.overall_quality}) {
    if (!(v >= 0.0 && v <= 10.0)) out.emplace_back("dimension out of [0,10]: " + std::to_string(v));
  }
  const double mean = (d.logical_consistency + d.factual_correctness + d.overall_quality) / 3.0;
  if (std::abs(mean - c.aggregate) > 1e-9) out.emplace_back("aggregate is not the mean of the dimensions");
  return out;
}

std::vector<std::string> check_preference_pair(const PreferencePair& p) {
  std::vector<std::string> out;
  if (!(p.chosen_score > p.rejected_score)) out.emplace_back("chosen score not strictly higher");
  if (p.chosen_id == p.rejected_id) out.emplace_back("chosen and rejected are the same trajectory");
  return out;
}

Language detect_language(std::string_view text) {
  return text::cjk_ratio(text) >= 0.25 ? Language::Zh : Language::En;
}

std::string compute_graph_id(const EntityGraph& g) {
  HashBuilder h;
  h.add(g.root).add(static_cast<std::uint64_t>(g.depth));
  for (const auto& [name, rec] : g.records) {
    h.add(name);
    for (const auto& f : rec.entity_self) h.add(f);
    for (const auto& [t, r] : rec.entity_relations) h.add(t).add(r);
  }
  return "g-" + h.hex();
}

std::string compute_task_id(std::string_view graph_id) { return "q-" + HashBuilder().add(graph_id).hex(); }

}  // namespace deepforge

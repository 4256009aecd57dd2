// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace deepforge {

/// A named real-world entity discovered during expansion.
struct Entity {
  std::string name;
  std::optional<std::string> description;
  std::optional<std::string> source_url;
  std::optional<std::string> origin_noun;

  friend bool operator==(const Entity&, const Entity&) = default;
};

/// Explorer output for one entity: intrinsic facts plus neighbor relations.
struct EntityRecord {
  Entity entity;
  std::vector<std::string> entity_self;
  std::map<std::string, std::string> entity_relations;

  friend bool operator==(const EntityRecord&, const EntityRecord&) = default;
};

/// Per-seed knowledge graph. Relation targets that were not explored are
/// listed in `frontier`.
struct EntityGraph {
  std::string id;
  std::string root;
  std::map<std::string, EntityRecord> records;
  int depth = 0;
  std::vector<std::string> frontier;
  bool truncated = false;

  friend bool operator==(const EntityGraph&, const EntityGraph&) = default;
};

enum class Language { En, Zh };

struct Provenance {
  std::string seed_entity;
  std::string graph_id;
  int depth = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct QAPair {
  std::string id;
  std::string question;
  std::string answer;
  Language language = Language::En;
  Provenance provenance;
  bool pruned = false;

  friend bool operator==(const QAPair&, const QAPair&) = default;
};

enum class SegmentKind { Think, ToolCall, ToolResponse, Answer, Plain };

struct ToolCall {
  std::string name;
  nlohmann::json arguments = nlohmann::json::object();

  friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

struct Segment {
  SegmentKind kind = SegmentKind::Plain;
  std::string text;
  std::optional<ToolCall> tool_call;  // present iff kind == ToolCall

  static Segment think(std::string text) { return {SegmentKind::Think, std::move(text), std::nullopt}; }
  static Segment answer(std::string text) { return {SegmentKind::Answer, std::move(text), std::nullopt}; }
  static Segment plain(std::string text) { return {SegmentKind::Plain, std::move(text), std::nullopt}; }
  static Segment tool_response(std::string text) {
    return {SegmentKind::ToolResponse, std::move(text), std::nullopt};
  }
  static Segment call(std::string name, nlohmann::json arguments);

  friend bool operator==(const Segment&, const Segment&) = default;
};

enum class Role { System, User, Assistant, Tool };

struct Message {
  Role role = Role::User;
  std::vector<Segment> segments;

  static Message system(std::string text) { return {Role::System, {Segment::plain(std::move(text))}}; }
  static Message user(std::string text) { return {Role::User, {Segment::plain(std::move(text))}}; }
  static Message tool(std::string text) { return {Role::Tool, {Segment::tool_response(std::move(text))}}; }
  static Message assistant(std::vector<Segment> segments) { return {Role::Assistant, std::move(segments)}; }

  /// Concatenated text of all segments (no tags). Convenient for System/User.
  std::string plain_text() const;

  friend bool operator==(const Message&, const Message&) = default;
};

enum class TrajectoryStatus { Complete, Truncated, Failed };

/// One agent attempt. `messages` holds only Assistant and Tool turns; the
/// query travels separately.
struct Trajectory {
  std::string id;
  std::string task_id;
  int rollout_index = 0;
  std::string query;
  std::optional<std::string> gold_answer;
  std::vector<Message> messages;
  std::optional<std::string> final_answer;
  int tool_call_count = 0;
  TrajectoryStatus status = TrajectoryStatus::Truncated;
  std::string detail;  // why a run ended Truncated/Failed; empty when Complete

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct ScoreDimensions {
  double logical_consistency = 0;
  double factual_correctness = 0;
  double overall_quality = 0;

  friend bool operator==(const ScoreDimensions&, const ScoreDimensions&) = default;
};

struct ScoreCard {
  std::string trajectory_id;
  std::string task_id;
  ScoreDimensions dimensions;
  double aggregate = 0;

  /// Builds a card whose aggregate is the arithmetic mean of the dimensions.
  static ScoreCard make(std::string trajectory_id, std::string task_id, ScoreDimensions dims);

  friend bool operator==(const ScoreCard&, const ScoreCard&) = default;
};

struct PreferencePair {
  std::string task_id;
  std::string chosen_id;
  std::string rejected_id;
  double chosen_score = 0;
  double rejected_score = 0;

  friend bool operator==(const PreferencePair&, const PreferencePair&) = default;
};

// Enum <-> wire string. Parsing throws deepforge::Error("SchemaMismatch").
std::string to_string(Language v);
std::string to_string(SegmentKind v);
std::string to_string(Role v);
std::string to_string(TrajectoryStatus v);
Language parse_language(std::string_view s);
SegmentKind parse_segment_kind(std::string_view s);
Role parse_role(std::string_view s);
TrajectoryStatus parse_trajectory_status(std::string_view s);

/// Invariant checks. They return a list of problems (empty when valid).
std::vector<std::string> check_entity(const Entity& e);
std::vector<std::string> check_entity_record(const EntityRecord& r);
std::vector<std::string> check_entity_graph(const EntityGraph& g);
std::vector<std::string> check_qa_pair(const QAPair& qa);
std::vector<std::string> check_score_card(const ScoreCard& c);
std::vector<std::string> check_preference_pair(const PreferencePair& p);

/// Heuristic script detection used for QAPair::language.
Language detect_language(std::string_view text);

/// Content-hash identifiers.
std::string compute_graph_id(const EntityGraph& g);
std::string compute_task_id(std::string_view graph_id);

}  // namespace deepforge

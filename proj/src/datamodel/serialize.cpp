// SPDX-License-Identifier: Apache-2.0
#include "deepforge/datamodel/serialize.hpp"

#include "deepforge/common/error.hpp"

namespace deepforge {

using nlohmann::json;

namespace {

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <class T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    v.reset();
  } else {
    v = it->get<T>();
  }
}

const json& require_object(const json& j, const char* what) {
  if (!j.is_object()) throw Error("SchemaMismatch", std::string(what) + " must be a JSON object");
  return j;
}

}  // namespace

void to_json(json& j, const Entity& v) {
  j = json{{"name", v.name}};
  put_optional(j, "description", v.description);
  put_optional(j, "source_url", v.source_url);
  put_optional(j, "origin_noun", v.origin_noun);
}

void from_json(const json& j, Entity& v) {
  require_object(j, "entity");
  v.name = j.at("name").get<std::string>();
  get_optional(j, "description", v.description);
  get_optional(j, "source_url", v.source_url);
  get_optional(j, "origin_noun", v.origin_noun);
}

void to_json(json& j, const EntityRecord& v) {
  j = json{{"entity", v.entity}, {"entity_self", v.entity_self}, {"entity_relations", v.entity_relations}};
}

void from_json(const json& j, EntityRecord& v) {
  require_object(j, "entity record");
  v.entity = j.at("entity").get<Entity>();
  v.entity_self = j.at("entity_self").get<std::vector<std::string>>();
  v.entity_relations = j.at("entity_relations").get<std::map<std::string, std::string>>();
}

void to_json(json& j, const EntityGraph& v) {
  j = json{{"id", v.id},       {"root", v.root},         {"depth", v.depth},
           {"records", v.records}, {"frontier", v.frontier}, {"truncated", v.truncated}};
}

void from_json(const json& j, EntityGraph& v) {
  require_object(j, "entity graph");
  v.id = j.at("id").get<std::string>();
  v.root = j.at("root").get<std::string>();
  v.depth = j.at("depth").get<int>();
  v.records = j.at("records").get<std::map<std::string, EntityRecord>>();
  v.frontier = j.value("frontier", std::vector<std::string>{});
  v.truncated = j.value("truncated", false);
}

void to_json(json& j, const QAPair& v) {
  j = json{{"id", v.id},
           {"question", v.question},
           {"answer", v.answer},
           {"language", to_string(v.language)},
           {"provenance",
            {{"seed_entity", v.provenance.seed_entity},
             {"graph_id", v.provenance.graph_id},
             {"depth", v.provenance.depth}}},
           {"pruned", v.pruned}};
}

void from_json(const json& j, QAPair& v) {
  require_object(j, "qa pair");
  v.id = j.at("id").get<std::string>();
  v.question = j.at("question").get<std::string>();
  v.answer = j.at("answer").get<std::string>();
  v.language = parse_language(j.at("language").get<std::string>());
  const auto& p = require_object(j.at("provenance"), "provenance");
  v.provenance.seed_entity = p.at("seed_entity").get<std::string>();
  v.provenance.graph_id = p.at("graph_id").get<std::string>();
  v.provenance.depth = p.at("depth").get<int>();
  v.pruned = j.at("pruned").get<bool>();
}

void to_json(json& j, const ToolCall& v) { j = json{{"name", v.name}, {"arguments", v.arguments}}; }

void from_json(const json& j, ToolCall& v) {
  require_object(j, "tool call");
  v.name = j.at("name").get<std::string>();
  v.arguments = j.at("arguments");
  if (!v.arguments.is_object()) throw Error("SchemaMismatch", "tool call arguments must be an object");
}

void to_json(json& j, const Segment& v) {
  j = json{{"kind", to_string(v.kind)}, {"text", v.text}};
  put_optional(j, "tool_call", v.tool_call);
}

void from_json(const json& j, Segment& v) {
  require_object(j, "segment");
  v.kind = parse_segment_kind(j.at("kind").get<std::string>());
  v.text = j.at("text").get<std::string>();
  get_optional(j, "tool_call", v.tool_call);
  if ((v.kind == SegmentKind::ToolCall) != v.tool_call.has_value()) {
    throw Error("SchemaMismatch", "tool_call must be present exactly for tool_call segments");
  }
}

void to_json(json& j, const Message& v) { j = json{{"role", to_string(v.role)}, {"segments", v.segments}}; }

void from_json(const json& j, Message& v) {
  require_object(j, "message");
  v.role = parse_role(j.at("role").get<std::string>());
  v.segments = j.at("segments").get<std::vector<Segment>>();
}

void to_json(json& j, const Trajectory& v) {
  j = json{{"id", v.id},
           {"task_id", v.task_id},
           {"rollout_index", v.rollout_index},
           {"query", v.query},
           {"messages", v.messages},
           {"tool_call_count", v.tool_call_count},
           {"status", to_string(v.status)}};
  put_optional(j, "gold_answer", v.gold_answer);
  put_optional(j, "final_answer", v.final_answer);
  if (!v.detail.empty()) j["detail"] = v.detail;
}

void from_json(const json& j, Trajectory& v) {
  require_object(j, "trajectory");
  v.id = j.at("id").get<std::string>();
  v.task_id = j.value("task_id", std::string{});
  v.rollout_index = j.value("rollout_index", 0);
  v.query = j.at("query").get<std::string>();
  v.messages = j.at("messages").get<std::vector<Message>>();
  v.tool_call_count = j.at("tool_call_count").get<int>();
  v.status = parse_trajectory_status(j.at("status").get<std::string>());
  get_optional(j, "gold_answer", v.gold_answer);
  get_optional(j, "final_answer", v.final_answer);
  v.detail = j.value("detail", std::string{});
}

void to_json(json& j, const ScoreCard& v) {
  j = json{{"trajectory_id", v.trajectory_id},
           {"task_id", v.task_id},
           {"dimensions",
            {{"logical_consistency", v.dimensions.logical_consistency},
             {"factual_correctness", v.dimensions.factual_correctness},
             {"overall_quality", v.dimensions.overall_quality}}},
           {"aggregate", v.aggregate}};
}

void from_json(const json& j, ScoreCard& v) {
  require_object(j, "score card");
  v.trajectory_id = j.at("trajectory_id").get<std::string>();
  v.task_id = j.value("task_id", std::string{});
  const auto& d = require_object(j.at("dimensions"), "dimensions");
  v.dimensions.logical_consistency = d.at("logical_consistency").get<double>();
  v.dimensions.factual_correctness = d.at("factual_correctness").get<double>();
  v.dimensions.overall_quality = d.at("overall_quality").get<double>();
  v.aggregate = j.at("aggregate").get<double>();
}

void to_json(json& j, const PreferencePair& v) {
  j = json{{"task_id", v.task_id},
           {"chosen_id", v.chosen_id},
           {"rejected_id", v.rejected_id},
           {"chosen_score", v.chosen_score},
           {"rejected_score", v.rejected_score}};
}

void from_json(const json& j, PreferencePair& v) {
  require_object(j, "preference pair");
  v.task_id = j.at("task_id").get<std::string>();
  v.chosen_id = j.at("chosen_id").get<std::string>();
  v.rejected_id = j.at("rejected_id").get<std::string>();
  v.chosen_score = j.at("chosen_score").get<double>();
  v.rejected_score = j.at("rejected_score").get<double>();
}

}  // namespace deepforge

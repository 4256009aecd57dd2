// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include "deepforge/datamodel/types.hpp"

// nlohmann::json ADL hooks. Field names follow the wire schema (snake_case);
// optional fields are omitted when absent. from_json throws on missing or
// mistyped required fields.
namespace deepforge {

void to_json(nlohmann::json& j, const Entity& v);
void from_json(const nlohmann::json& j, Entity& v);
void to_json(nlohmann::json& j, const EntityRecord& v);
void from_json(const nlohmann::json& j, EntityRecord& v);
void to_json(nlohmann::json& j, const EntityGraph& v);
void from_json(const nlohmann::json& j, EntityGraph& v);
void to_json(nlohmann::json& j, const QAPair& v);
void from_json(const nlohmann::json& j, QAPair& v);
void to_json(nlohmann::json& j, const ToolCall& v);
void from_json(const nlohmann::json& j, ToolCall& v);
void to_json(nlohmann::json& j, const Segment& v);
void from_json(const nlohmann::json& j, Segment& v);
void to_json(nlohmann::json& j, const Message& v);
void from_json(const nlohmann::json& j, Message& v);
void to_json(nlohmann::json& j, const Trajectory& v);
void from_json(const nlohmann::json& j, Trajectory& v);
void to_json(nlohmann::json& j, const ScoreCard& v);
void from_json(const nlohmann::json& j, ScoreCard& v);
void to_json(nlohmann::json& j, const PreferencePair& v);
void from_json(const nlohmann::json& j, PreferencePair& v);

}  // namespace deepforge

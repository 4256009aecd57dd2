// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace deepforge {

/// Validates a JSON value against the subset of JSON Schema used by the tool
/// contracts: type (string/array/object/integer/number/boolean, or a list),
/// properties, required, additionalProperties (bool), items, minItems,
/// maxItems, minLength, enum, oneOf, anyOf. Unsupported keywords are ignored.
/// Returns human-readable violations; empty means valid.
std::vector<std::string> validate_json_schema(const nlohmann::json& schema, const nlohmann::json& value);

}  // namespace deepforge

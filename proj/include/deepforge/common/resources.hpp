// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

namespace deepforge {

/// Prompt template compiled into the binary from prompts/<name>.txt, without
/// its license header line. Throws Error("UnknownResource").
std::string prompt_template(std::string_view name);

/// JSON tool schema from schemas/tools/<name>.json or schemas/explorer/<name>.json.
nlohmann::json tool_schema(std::string_view name);
nlohmann::json explorer_schema(std::string_view name);

/// Substitutes `{key}` placeholders. Braces that do not name a key are left
/// alone, so JSON examples inside templates survive.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

}  // namespace deepforge

// SPDX-License-Identifier: Apache-2.0
#include "deepforge/common/resources.hpp"

#include "deepforge/common/error.hpp"

namespace deepforge {

namespace embedded {
std::string_view prompt(std::string_view name);
std::string_view tool_schema(std::string_view name);
std::string_view explorer_schema(std::string_view name);
}  // namespace embedded

namespace {

std::string_view require(std::string_view text, std::string_view kind, std::string_view name) {
  if (text.empty()) throw Error("UnknownResource", std::string(kind) + " '" + std::string(name) + "'");
  return text;
}

}  // namespace

std::string prompt_template(std::string_view name) {
  std::string_view text = require(embedded::prompt(name), "prompt", name);
  if (text.rfind("# SPDX", 0) == 0) {
    const auto nl = text.find('\n');
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
  }
  return std::string(text);
}

nlohmann::json tool_schema(std::string_view name) {
  return nlohmann::json::parse(require(embedded::tool_schema(name), "tool schema", name));
}

nlohmann::json explorer_schema(std::string_view name) {
  return nlohmann::json::parse(require(embedded::explorer_schema(name), "explorer schema", name));
}

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

}  // namespace deepforge

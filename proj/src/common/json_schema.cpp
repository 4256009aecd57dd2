// SPDX-License-Identifier: Apache-2.0
#include "deepforge/common/json_schema.hpp"

#include <cmath>

namespace deepforge {
namespace {

using nlohmann::json;

bool matches_type(const std::string& type, const json& value) {
  if (type == "string") return value.is_string();
  if (type == "array") return value.is_array();
  if (type == "object") return value.is_object();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  if (type == "number") return value.is_number();
  if (type == "integer") {
    if (value.is_number_integer()) return true;
    if (value.is_number_float()) {
      const double d = value.get<double>();
      return std::isfinite(d) && std::floor(d) == d;
    }
    return false;
  }
  return false;
}

/// Non-negative integer, whether the JSON was parsed from text or built in code.
bool is_count(const json& v) { return v.is_number_integer() && v.get<std::int64_t>() >= 0; }

void check(const json& schema, const json& value, const std::string& path, std::vector<std::string>& out) {
  if (!schema.is_object()) return;

  if (auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    if (it->is_string()) {
      ok = matches_type(it->get<std::string>(), value);
    } else if (it->is_array()) {
      for (const auto& t : *it) ok = ok || (t.is_string() && matches_type(t.get<std::string>(), value));
    }
    if (!ok) {
      out.push_back(path + ": expected type " + it->dump() + ", got " + value.type_name());
      return;
    }
  }

  if (auto it = schema.find("enum"); it != schema.end() && it->is_array()) {
    bool found = false;
    for (const auto& e : *it) found = found || e == value;
    if (!found) out.push_back(path + ": value not in enum " + it->dump());
  }

  for (const char* key : {"oneOf", "anyOf"}) {
    auto it = schema.find(key);
    if (it == schema.end() || !it->is_array()) continue;
    std::size_t passing = 0;
    for (const auto& alt : *it) {
      std::vector<std::string> sub;
      check(alt, value, path, sub);
      if (sub.empty()) ++passing;
    }
    const bool one_of = std::string(key) == "oneOf";
    if ((one_of && passing != 1) || (!one_of && passing == 0)) {
      out.push_back(path + ": value matches " + std::to_string(passing) + " alternatives of " + key);
    }
  }

  if (value.is_string()) {
    if (auto it = schema.find("minLength"); it != schema.end() && is_count(*it)) {
      if (value.get_ref<const std::string&>().size() < it->get<std::size_t>()) {
        out.push_back(path + ": string shorter than " + it->dump());
      }
    }
  }

  if (value.is_array()) {
    if (auto it = schema.find("minItems"); it != schema.end() && is_count(*it)) {
      if (value.size() < it->get<std::size_t>()) out.push_back(path + ": fewer than " + it->dump() + " items");
    }
    if (auto it = schema.find("maxItems"); it != schema.end() && is_count(*it)) {
      if (value.size() > it->get<std::size_t>()) out.push_back(path + ": more than " + it->dump() + " items");
    }
    if (auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        check(*it, value[i], path + "[" + std::to_string(i) + "]", out);
      }
    }
  }

  if (value.is_object()) {
    const auto props = schema.find("properties");
    if (auto it = schema.find("required"); it != schema.end() && it->is_array()) {
      for (const auto& name : *it) {
        if (name.is_string() && !value.contains(name.get<std::string>())) {
          out.push_back(path + ": missing required property \"" + name.get<std::string>() + "\"");
        }
      }
    }
    for (const auto& [name, member] : value.items()) {
      const bool declared = props != schema.end() && props->is_object() && props->contains(name);
      if (declared) {
        check((*props)[name], member, path + "." + name, out);
      } else if (auto ap = schema.find("additionalProperties"); ap != schema.end() && ap->is_boolean() &&
                                                                 !ap->get<bool>()) {
        out.push_back(path + ": unexpected property \"" + name + "\"");
      }
    }
  }
}

}  // namespace

std::vector<std::string> validate_json_schema(const nlohmann::json& schema, const nlohmann::json& value) {
  std::vector<std::string> out;
  check(schema, value, "$", out);
  return out;
}

}  // namespace deepforge

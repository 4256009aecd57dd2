// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepforge/common/rng.hpp"
#include "deepforge/datamodel/transcript.hpp"
#include "deepforge/datamodel/types.hpp"

// Random messages for the render/parse round-trip property.
namespace deepforge::dftest {

inline std::string random_text(Rng& rng, bool allow_empty) {
  static const std::vector<std::string> atoms = {"a",  "b",  "Z",   "7",   " ",  "\n", "<",  ">",  "/",   "{",
                                                 "}",  "\"", "\\",  "é",   "密", "度", "x<y", "<b>", "&amp;", "\t",
                                                 "answer", "think", "tool"};
  std::string s;
  const std::size_t n = rng.below(12) + (allow_empty ? 0 : 1);
  for (std::size_t i = 0; i < n; ++i) s += atoms[rng.below(atoms.size())];
  return s;
}

inline nlohmann::json random_json(Rng& rng, int depth) {
  switch (depth > 2 ? rng.below(4) : rng.below(6)) {
    case 0: return random_text(rng, true);
    case 1: return static_cast<std::int64_t>(rng.next() % 200000) - 100000;
    case 2: return rng.uniform() * 1000.0 - 500.0;
    case 3: return rng.chance(0.5);
    case 4: {
      nlohmann::json a = nlohmann::json::array();
      for (std::size_t i = 0, n = rng.below(4); i < n; ++i) a.push_back(random_json(rng, depth + 1));
      return a;
    }
    default: {
      nlohmann::json o = nlohmann::json::object();
      for (std::size_t i = 0, n = rng.below(4); i < n; ++i) o["k" + std::to_string(rng.below(50))] = random_json(rng, depth + 1);
      return o;
    }
  }
}

inline bool contains_tag_literal(const std::string& s) {
  for (const auto& tag : GrammarProfile::agent().tags()) {
    if (s.find("<" + tag + ">") != std::string::npos || s.find("</" + tag + ">") != std::string::npos) return true;
  }
  return false;
}

inline std::optional<Message> random_message(Rng& rng) {
  Message m;
  if (rng.chance(0.3)) {
    m = Message::tool(random_text(rng, true));
  } else {
    m.role = Role::Assistant;
    m.segments.push_back(Segment::think(random_text(rng, true)));
    if (rng.chance(0.5)) {
      nlohmann::json args = nlohmann::json::object();
      for (std::size_t i = 0, n = rng.below(4); i < n; ++i) args["p" + std::to_string(i)] = random_json(rng, 0);
      m.segments.push_back(Segment::call("tool_" + std::to_string(rng.below(5)), args));
    } else {
      m.segments.push_back(Segment::answer(random_text(rng, true)));
    }
  }
  for (const auto& s : m.segments) {
    if (contains_tag_literal(s.text)) return std::nullopt;
  }
  return m;
}

}  // namespace deepforge::dftest

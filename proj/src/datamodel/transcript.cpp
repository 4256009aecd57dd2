// SPDX-License-Identifier: Apache-2.0
#include "deepforge/datamodel/transcript.hpp"

#include "deepforge/common/hash.hpp"
#include "deepforge/common/text.hpp"

namespace deepforge {

using nlohmann::json;

GrammarProfile GrammarProfile::agent() { return GrammarProfile{}; }

GrammarProfile GrammarProfile::explorer() {
  GrammarProfile p;
  p.call_tag = "function_call";
  p.terminal_tag = "result";
  p.think_required = false;
  return p;
}

std::vector<std::string> GrammarProfile::tags() const { return {think_tag, call_tag, terminal_tag, response_tag}; }

namespace {

bool is_terminal(SegmentKind k) { return k == SegmentKind::ToolCall || k == SegmentKind::Answer; }

ToolCall parse_tool_json(std::string_view content, std::size_t offset) {
  json j;
  try {
    j = json::parse(content);
  } catch (const json::parse_error& e) {
    const std::size_t at = offset + (e.byte > 0 ? e.byte - 1 : 0);
    throw TranscriptError("MalformedToolJson", "tool call is not valid JSON", at);
  }
  if (!j.is_object()) throw TranscriptError("MalformedToolJson", "tool call must be a JSON object", offset);
  auto name = j.find("name");
  if (name == j.end() || !name->is_string() || name->get_ref<const std::string&>().empty()) {
    throw TranscriptError("MalformedToolJson", "tool call needs a non-empty string \"name\"", offset);
  }
  auto args = j.find("arguments");
  if (args == j.end() || !args->is_object()) {
    throw TranscriptError("MalformedToolJson", "tool call needs an object \"arguments\"", offset);
  }
  return ToolCall{name->get<std::string>(), *args};
}

std::vector<Segment> parse_segments(std::string_view text, const GrammarProfile& profile) {
  struct TagInfo {
    std::string open;
    std::string close;
    std::string name;
    SegmentKind kind;
  };
  const std::vector<TagInfo> tags = {
      {"<" + profile.think_tag + ">", "</" + profile.think_tag + ">", profile.think_tag, SegmentKind::Think},
      {"<" + profile.call_tag + ">", "</" + profile.call_tag + ">", profile.call_tag, SegmentKind::ToolCall},
      {"<" + profile.terminal_tag + ">", "</" + profile.terminal_tag + ">", profile.terminal_tag,
       SegmentKind::Answer},
      {"<" + profile.response_tag + ">", "</" + profile.response_tag + ">", profile.response_tag,
       SegmentKind::ToolResponse},
  };

  std::vector<Segment> segments;
  std::size_t plain_start = 0;
  std::size_t pos = 0;
  auto flush_plain = [&](std::size_t end) {
    auto chunk = text::trim_view(text.substr(plain_start, end - plain_start));
    if (!chunk.empty()) segments.push_back(Segment::plain(std::string(chunk)));
  };

  while (pos < text.size()) {
    const std::size_t lt = text.find('<', pos);
    if (lt == std::string_view::npos) break;
    bool matched = false;
    for (const auto& tag : tags) {
      if (text.compare(lt, tag.close.size(), tag.close) == 0) {
        throw TranscriptError("StrayClosingTag", "closing </" + tag.name + "> without an opening tag", lt);
      }
      if (text.compare(lt, tag.open.size(), tag.open) != 0) continue;
      flush_plain(lt);
      const std::size_t content_start = lt + tag.open.size();
      const std::size_t end = text.find(tag.close, content_start);
      if (end == std::string_view::npos) {
        throw TranscriptError("UnclosedTag", "<" + tag.name + "> is never closed", lt);
      }
      const std::string_view content = text.substr(content_start, end - content_start);
      Segment seg;
      seg.kind = tag.kind;
      seg.text = text::trim(content);
      if (tag.kind == SegmentKind::ToolCall) seg.tool_call = parse_tool_json(content, content_start);
      segments.push_back(std::move(seg));
      pos = end + tag.close.size();
      plain_start = pos;
      matched = true;
      break;
    }
    if (!matched) pos = lt + 1;
  }
  flush_plain(text.size());
  return segments;
}

std::string canonical_tool_json(const ToolCall& call) {
  return "{\"name\":" + json(call.name).dump() + ",\"arguments\":" + call.arguments.dump() + "}";
}

std::string wrap(const std::string& tag, std::string_view body) {
  std::string out;
  out.reserve(body.size() + 2 * tag.size() + 5);
  out.append("<").append(tag).append(">").append(body).append("</").append(tag).append(">");
  return out;
}

}  // namespace

Message parse_assistant_message(std::string_view text, const GrammarProfile& profile) {
  Message m;
  m.role = Role::Assistant;
  m.segments = parse_segments(text, profile);
  std::size_t terminals = 0;
  for (const auto& s : m.segments) terminals += is_terminal(s.kind) ? 1 : 0;
  if (terminals > 1) {
    throw TranscriptError("MultipleTerminalSegments",
                          "expected one <" + profile.call_tag + "> or <" + profile.terminal_tag + ">, found " +
                              std::to_string(terminals),
                          0);
  }
  return m;
}

bool has_plain_segments(const Message& m) noexcept {
  for (const auto& s : m.segments) {
    if (s.kind == SegmentKind::Plain) return true;
  }
  return false;
}

std::vector<std::string> check_message(const Message& m, const GrammarProfile& profile) {
  std::vector<std::string> out;
  switch (m.role) {
    case Role::Assistant: {
      std::vector<const Segment*> tagged;
      for (const auto& s : m.segments) {
        if (s.kind == SegmentKind::ToolResponse) out.emplace_back("assistant message contains a tool response");
        if (s.kind != SegmentKind::Plain && s.kind != SegmentKind::ToolResponse) tagged.push_back(&s);
      }
      std::size_t i = 0;
      if (!tagged.empty() && tagged[0]->kind == SegmentKind::Think) {
        i = 1;
      } else if (profile.think_required) {
        out.emplace_back("missing leading think segment");
      }
      const std::size_t rest = tagged.size() - i;
      if (rest != 1 || !is_terminal(tagged[i]->kind)) {
        out.emplace_back("expected exactly one tool call or answer after the think segment");
      }
      for (const auto* s : tagged) {
        if (s->kind == SegmentKind::ToolCall && !s->tool_call) out.emplace_back("tool call without parsed JSON");
        if (s->kind != SegmentKind::ToolCall && s->tool_call) out.emplace_back("non-call segment carries a tool call");
      }
      break;
    }
    case Role::Tool:
      if (m.segments.size() != 1 || m.segments[0].kind != SegmentKind::ToolResponse) {
        out.emplace_back("tool message must hold exactly one tool response");
      }
      break;
    case Role::System:
    case Role::User:
      for (const auto& s : m.segments) {
        if (s.kind != SegmentKind::Plain) out.emplace_back("system/user messages hold plain text only");
      }
      break;
  }
  return out;
}

std::string render_segments(const Message& m, const GrammarProfile& profile) {
  std::string out;
  for (const auto& s : m.segments) {
    switch (s.kind) {
      case SegmentKind::Think: out += wrap(profile.think_tag, s.text); break;
      case SegmentKind::ToolCall:
        out += wrap(profile.call_tag, s.tool_call ? canonical_tool_json(*s.tool_call) : s.text);
        break;
      case SegmentKind::Answer: out += wrap(profile.terminal_tag, s.text); break;
      case SegmentKind::ToolResponse: out += wrap(profile.response_tag, s.text); break;
      case SegmentKind::Plain: out += s.text; break;
    }
  }
  return out;
}

std::string render_message(const Message& m, const GrammarProfile& profile) {
  if (auto problems = check_message(m, profile); !problems.empty()) {
    throw InvariantViolation(text::join(problems, "; "));
  }
  const auto tags = profile.tags();
  auto check_literal = [&](std::string_view body) {
    for (const auto& tag : tags) {
      if (text::contains(body, "<" + tag + ">") || text::contains(body, "</" + tag + ">")) {
        throw InvariantViolation("segment text contains the tag literal <" + tag + ">");
      }
    }
  };
  bool previous_plain = false;
  for (const auto& s : m.segments) {
    if (s.kind == SegmentKind::ToolCall) {
      check_literal(canonical_tool_json(*s.tool_call));
    } else {
      check_literal(s.text);
    }
    if (s.kind == SegmentKind::Plain && m.role == Role::Assistant) {
      if (text::trim_view(s.text).empty()) throw InvariantViolation("blank plain segment");
      if (previous_plain) throw InvariantViolation("adjacent plain segments");
    }
    previous_plain = s.kind == SegmentKind::Plain;
  }
  return render_segments(m, profile);
}

bool segment_equivalent(const Message& a, const Message& b) {
  if (a.role != b.role || a.segments.size() != b.segments.size()) return false;
  for (std::size_t i = 0; i < a.segments.size(); ++i) {
    const auto& x = a.segments[i];
    const auto& y = b.segments[i];
    if (x.kind != y.kind) return false;
    if (x.kind == SegmentKind::ToolCall) {
      if (!x.tool_call || !y.tool_call || !(*x.tool_call == *y.tool_call)) return false;
    } else if (text::trim_view(x.text) != text::trim_view(y.text)) {
      return false;
    }
  }
  return true;
}

std::string render_trajectory(const Trajectory& t) {
  std::string out = t.query;
  for (const auto& m : t.messages) {
    out += '\n';
    out += render_segments(m);
  }
  return out;
}

Trajectory parse_transcript(std::string_view query, std::string_view transcript, const GrammarProfile& profile) {
  Trajectory t;
  t.query = std::string(query);
  Message current = Message::assistant({});
  for (auto& seg : parse_segments(transcript, profile)) {
    if (seg.kind == SegmentKind::ToolResponse) {
      if (!current.segments.empty()) t.messages.push_back(std::exchange(current, Message::assistant({})));
      t.messages.push_back(Message{Role::Tool, {std::move(seg)}});
      continue;
    }
    const bool terminal = is_terminal(seg.kind);
    if (seg.kind == SegmentKind::ToolCall) ++t.tool_call_count;
    current.segments.push_back(std::move(seg));
    if (terminal) t.messages.push_back(std::exchange(current, Message::assistant({})));
  }
  if (!current.segments.empty()) t.messages.push_back(std::move(current));

  t.status = TrajectoryStatus::Truncated;
  if (!t.messages.empty() && t.messages.back().role == Role::Assistant) {
    for (const auto& s : t.messages.back().segments) {
      if (s.kind == SegmentKind::Answer) {
        t.status = TrajectoryStatus::Complete;
        t.final_answer = s.text;
      }
    }
  }
  return t;
}

FormatReport validate_trajectory(const Trajectory& t) {
  FormatReport report;
  auto add = [&](std::optional<std::size_t> idx, std::string what) {
    report.violations.push_back(FormatViolation{idx, std::move(what)});
  };

  std::optional<std::size_t> pending_call;
  std::optional<std::size_t> answer_at;
  int calls = 0;
  for (std::size_t i = 0; i < t.messages.size(); ++i) {
    const Message& m = t.messages[i];
    for (auto& p : check_message(m)) add(i, p);
    switch (m.role) {
      case Role::System:
      case Role::User:
        add(i, "unexpected " + to_string(m.role) + " message at " + std::to_string(i));
        break;
      case Role::Assistant: {
        if (pending_call) {
          add(*pending_call, "missing tool response after message " + std::to_string(*pending_call));
          pending_call.reset();
        }
        if (answer_at) add(i, "message after the final answer at " + std::to_string(*answer_at));
        for (const auto& s : m.segments) {
          if (s.kind == SegmentKind::ToolCall) {
            ++calls;
            pending_call = i;
          } else if (s.kind == SegmentKind::Answer && !answer_at) {
            answer_at = i;
          }
        }
        break;
      }
      case Role::Tool:
        if (!pending_call) {
          add(i, "tool message at " + std::to_string(i) + " without a preceding tool call");
        }
        if (answer_at) add(i, "message after the final answer at " + std::to_string(*answer_at));
        pending_call.reset();
        break;
    }
  }
  if (pending_call) add(*pending_call, "missing tool response after message " + std::to_string(*pending_call));

  if (calls != t.tool_call_count) {
    add(std::nullopt, "tool_call_count is " + std::to_string(t.tool_call_count) + " but " +
                          std::to_string(calls) + " tool calls are present");
  }

  const Message* last = t.messages.empty() ? nullptr : &t.messages.back();
  const Segment* last_answer = nullptr;
  if (last && last->role == Role::Assistant) {
    for (const auto& s : last->segments) {
      if (s.kind == SegmentKind::Answer) last_answer = &s;
    }
  }
  if (t.status == TrajectoryStatus::Complete) {
    if (!last_answer) {
      add(std::nullopt, "status is complete but the last message carries no answer");
    } else if (!t.final_answer || *t.final_answer != last_answer->text) {
      add(std::nullopt, "final_answer does not equal the text of the last answer segment");
    }
  } else {
    if (answer_at) add(*answer_at, "answer present but status is " + to_string(t.status));
    if (t.final_answer) add(std::nullopt, "final_answer set but status is " + to_string(t.status));
  }
  return report;
}

std::string compute_trajectory_id(const Trajectory& t) {
  HashBuilder h;
  h.add(t.task_id).add(static_cast<std::uint64_t>(t.rollout_index)).add(t.query);
  for (const auto& m : t.messages) h.add(to_string(m.role)).add(render_segments(m));
  h.add(to_string(t.status));
  return "t-" + h.hex();
}

}  // namespace deepforge

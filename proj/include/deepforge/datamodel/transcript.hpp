// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deepforge/common/error.hpp"
#include "deepforge/datamodel/types.hpp"

namespace deepforge {

/// Tag vocabulary for one conversation protocol. The research agent uses
/// <tool_call>/<answer>; the graph explorer uses <function_call>/<result>.
struct GrammarProfile {
  std::string think_tag = "think";
  std::string call_tag = "tool_call";
  std::string terminal_tag = "answer";
  std::string response_tag = "tool_response";
  bool think_required = true;

  static GrammarProfile agent();
  static GrammarProfile explorer();

  std::vector<std::string> tags() const;
};

/// Raised by parse_assistant_message and parse_transcript. `kind()` is one of
/// UnclosedTag, StrayClosingTag, MalformedToolJson, MultipleTerminalSegments.
class TranscriptError : public Error {
 public:
  TranscriptError(std::string kind, const std::string& detail, std::size_t position)
      : Error(std::move(kind), detail + " (at byte " + std::to_string(position) + ")"), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Raised by render_message when the message breaks the Message invariants.
class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& detail) : Error("InvariantViolation", detail) {}
};

/// Splits model output into tagged segments. Tags are literal and flat: the
/// content of a segment runs to the first matching closing tag. Non-blank text
/// outside tags becomes Plain segments. Segment text is trimmed.
Message parse_assistant_message(std::string_view text, const GrammarProfile& profile = GrammarProfile::agent());

/// True when the message carries any Plain segment (text outside tags).
bool has_plain_segments(const Message& m) noexcept;

/// Checks the per-role structure of one message; empty when valid.
/// Assistant: one Think first, then exactly one ToolCall or Answer (Plain
/// segments are ignored here). Tool: exactly one ToolResponse.
std::vector<std::string> check_message(const Message& m, const GrammarProfile& profile = GrammarProfile::agent());

/// Canonical serialization. Throws InvariantViolation for malformed messages
/// or segment text that contains a recognized tag literal.
std::string render_message(const Message& m, const GrammarProfile& profile = GrammarProfile::agent());

/// Serializes segments without structural checks (used for token accounting
/// and for transcripts that may be malformed).
std::string render_segments(const Message& m, const GrammarProfile& profile = GrammarProfile::agent());

/// Kind, trimmed text, and (for tool calls) name plus arguments must agree.
bool segment_equivalent(const Message& a, const Message& b);

/// Full text form: the query, then every message, newline separated.
std::string render_trajectory(const Trajectory& t);

/// Parses a raw transcript (assistant turns interleaved with
/// <tool_response> blocks) into a trajectory with derived status, counts and
/// final answer. The id is left empty.
Trajectory parse_transcript(std::string_view query, std::string_view transcript,
                            const GrammarProfile& profile = GrammarProfile::agent());

struct FormatViolation {
  std::optional<std::size_t> message_index;
  std::string description;
};

struct FormatReport {
  std::vector<FormatViolation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

/// Checks every Trajectory invariant. Violations are data, never thrown.
FormatReport validate_trajectory(const Trajectory& t);

/// Content-hash id over task, rollout, query and rendered messages.
std::string compute_trajectory_id(const Trajectory& t);

}  // namespace deepforge

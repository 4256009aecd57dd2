// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepforge/datamodel/types.hpp"
#include "deepforge/providers/call_guard.hpp"

namespace deepforge {

enum class FinishReason { Stop, Length, Error };

struct ChatRequest {
  std::vector<Message> messages;
  double temperature = 0.0;
  int max_output_tokens = 4096;
  std::string model;    // empty: backend default
  std::string purpose;  // stage label, e.g. "extract", "agent", "judge_quality"
  std::uint64_t seed = 0;
  /// Structured side information for offline backends. Never sent on the wire.
  nlohmann::json hints = nlohmann::json::object();
};

struct ChatResponse {
  FinishReason finish = FinishReason::Stop;
  std::string text;  // empty when finish == Error
};

/// First words of every repair re-prompt sent after an unusable model reply.
inline constexpr std::string_view kRepairNoticePrefix = "Your previous reply could not be used:";

std::string to_string(FinishReason f);
std::string role_label(Role r);

/// Text of one message as a model sees it (tags rendered for assistant and
/// tool turns).
std::string message_text(const Message& m);

/// "<|role|>\n<text>\n" per message. This is the key the mock fixture table
/// is indexed by.
std::string render_prompt(const std::vector<Message>& messages);
std::string prompt_hash(const std::vector<Message>& messages);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  /// Throws ProviderError; transient ones are retried by the client.
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Guarded chat access; the ledger counts this provider as "llm".
class ChatClient {
 public:
  ChatClient(std::shared_ptr<ChatBackend> backend, std::shared_ptr<CallGuard> guard);

  /// Preconditions: messages non-empty, temperature >= 0. A backend answer
  /// with finish == Error is treated as a transient outage.
  ChatResponse chat(const ChatRequest& request, const CancelToken* cancel = nullptr) const;

  /// Convenience for single-prompt stages: one user message.
  ChatResponse ask(const std::string& prompt, const std::string& purpose, std::uint64_t seed,
                   nlohmann::json hints = nlohmann::json::object(), const CancelToken* cancel = nullptr) const;

  const CallGuard& guard() const noexcept { return *guard_; }

 private:
  std::shared_ptr<ChatBackend> backend_;
  std::shared_ptr<CallGuard> guard_;
};

}  // namespace deepforge

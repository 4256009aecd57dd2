// SPDX-License-Identifier: Apache-2.0
#include "deepforge/providers/mock_chat.hpp"

#include "deepforge/common/text.hpp"
#include "deepforge/datamodel/jsonl.hpp"
#include "deepforge/providers/errors.hpp"

namespace deepforge {

MockChatBackend::MockChatBackend(std::map<std::string, std::string> table, MockFallback fallback,
                                 std::shared_ptr<ChatBackend> simulator)
    : table_(std::move(table)), fallback_(fallback), simulator_(std::move(simulator)) {
  if (fallback_ == MockFallback::Simulate && !simulator_) {
    throw PreconditionError("simulate fallback needs a simulator backend");
  }
}

std::map<std::string, std::string> MockChatBackend::load_table(const std::filesystem::path& path) {
  std::map<std::string, std::string> table;
  std::size_t line = 0;
  for (const auto& row : read_json_lines(path)) {
    ++line;
    if (!row.is_object() || !row.contains("request_hash") || !row.contains("response")) {
      throw PersistenceError("SchemaMismatch", path.string() + ": fixture row needs request_hash and response", line);
    }
    table[row["request_hash"].get<std::string>()] = row["response"].get<std::string>();
  }
  return table;
}

ChatResponse MockChatBackend::complete(const ChatRequest& request) {
  const std::string key = prompt_hash(request.messages);
  if (auto it = table_.find(key); it != table_.end()) {
    std::lock_guard<std::mutex> lock(mu_);
    ++hits_;
    return {FinishReason::Stop, it->second};
  }
  switch (fallback_) {
    case MockFallback::Error:
      throw ProviderError("MockMiss", "no fixture for request " + key + " (" + request.purpose + ")");
    case MockFallback::Echo:
      return {FinishReason::Stop,
              "[mock " + key + "] " + text::preview(message_text(request.messages.back()), 120)};
    case MockFallback::Simulate:
      return simulator_->complete(request);
  }
  return {FinishReason::Error, ""};
}

std::size_t MockChatBackend::table_hits() const {
  std::lock_guard<std::mutex> lock(mu_);
  return hits_;
}

ScriptedChatBackend::ScriptedChatBackend(std::vector<std::string> replies)
    : replies_(replies.begin(), replies.end()) {}

ScriptedChatBackend::ScriptedChatBackend(Responder responder) : responder_(std::move(responder)) {}

void ScriptedChatBackend::fail_next(int n, bool transient) {
  std::lock_guard<std::mutex> lock(mu_);
  failures_ = n;
  failures_transient_ = transient;
}

void ScriptedChatBackend::push(std::string reply) {
  std::lock_guard<std::mutex> lock(mu_);
  replies_.push_back(std::move(reply));
}

ChatResponse ScriptedChatBackend::complete(const ChatRequest& request) {
  std::unique_lock<std::mutex> lock(mu_);
  requests_.push_back(request);
  if (failures_ > 0) {
    --failures_;
    throw ProviderError("ProviderUnavailable", "scripted failure", failures_transient_);
  }
  if (responder_) {
    lock.unlock();
    return {FinishReason::Stop, responder_(request)};
  }
  if (replies_.empty()) throw ProviderError("ScriptExhausted", "no scripted reply left");
  std::string reply = std::move(replies_.front());
  replies_.pop_front();
  return {FinishReason::Stop, std::move(reply)};
}

std::vector<ChatRequest> ScriptedChatBackend::requests() const {
  std::lock_guard<std::mutex> lock(mu_);
  return requests_;
}

std::size_t ScriptedChatBackend::call_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return requests_.size();
}

}  // namespace deepforge

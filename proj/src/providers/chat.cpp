// SPDX-License-Identifier: Apache-2.0
#include "deepforge/providers/chat.hpp"

#include "deepforge/common/hash.hpp"
#include "deepforge/datamodel/transcript.hpp"

namespace deepforge {

std::string to_string(FinishReason f) {
  switch (f) {
    case FinishReason::Stop: return "stop";
    case FinishReason::Length: return "length";
    case FinishReason::Error: return "error";
  }
  return "error";
}

std::string role_label(Role r) { return to_string(r); }

std::string message_text(const Message& m) { return render_segments(m); }

std::string render_prompt(const std::vector<Message>& messages) {
  std::string out;
  for (const auto& m : messages) {
    out += "<|";
    out += role_label(m.role);
    out += "|>\n";
    out += message_text(m);
    out += '\n';
  }
  return out;
}

std::string prompt_hash(const std::vector<Message>& messages) { return to_hex16(fnv1a64(render_prompt(messages))); }

ChatClient::ChatClient(std::shared_ptr<ChatBackend> backend, std::shared_ptr<CallGuard> guard)
    : backend_(std::move(backend)), guard_(std::move(guard)) {}

ChatResponse ChatClient::chat(const ChatRequest& request, const CancelToken* cancel) const {
  if (request.messages.empty()) throw PreconditionError("chat request needs at least one message");
  if (!(request.temperature >= 0)) throw PreconditionError("temperature must be >= 0");
  return guard_->run(
      [&] {
        ChatResponse r = backend_->complete(request);
        if (r.finish == FinishReason::Error) {
          throw ProviderError("ProviderUnavailable", "chat backend returned an error completion", true);
        }
        return r;
      },
      cancel);
}

ChatResponse ChatClient::ask(const std::string& prompt, const std::string& purpose, std::uint64_t seed,
                             nlohmann::json hints, const CancelToken* cancel) const {
  ChatRequest req;
  req.messages.push_back(Message::user(prompt));
  req.purpose = purpose;
  req.seed = seed;
  req.hints = std::move(hints);
  return chat(req, cancel);
}

}  // namespace deepforge

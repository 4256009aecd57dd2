// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "deepforge/providers/chat.hpp"
#include "deepforge/providers/mock_world.hpp"

namespace deepforge {

enum class MockFallback { Error, Echo, Simulate };

/// Offline chat backend. A request is looked up by prompt_hash() in the
/// fixture table; misses go to the fallback: an error, a templated echo, or
/// the simulator.
class MockChatBackend : public ChatBackend {
 public:
  MockChatBackend(std::map<std::string, std::string> table, MockFallback fallback,
                  std::shared_ptr<ChatBackend> simulator = nullptr);

  /// Reads JSONL rows of {"request_hash", "response"}.
  static std::map<std::string, std::string> load_table(const std::filesystem::path& path);

  ChatResponse complete(const ChatRequest& request) override;

  std::size_t table_hits() const;

 private:
  std::map<std::string, std::string> table_;
  MockFallback fallback_;
  std::shared_ptr<ChatBackend> simulator_;
  mutable std::mutex mu_;
  std::size_t hits_ = 0;
};

/// Replays canned replies in order and records every request. Tests use it to
/// script policies, judges and failure sequences.
class ScriptedChatBackend : public ChatBackend {
 public:
  using Responder = std::function<std::string(const ChatRequest&)>;

  explicit ScriptedChatBackend(std::vector<std::string> replies = {});
  explicit ScriptedChatBackend(Responder responder);

  /// The next `n` calls throw a ProviderError of the given transience.
  void fail_next(int n, bool transient = true);
  void push(std::string reply);

  ChatResponse complete(const ChatRequest& request) override;

  std::vector<ChatRequest> requests() const;
  std::size_t call_count() const;

 private:
  mutable std::mutex mu_;
  std::deque<std::string> replies_;
  Responder responder_;
  int failures_ = 0;
  bool failures_transient_ = true;
  std::vector<ChatRequest> requests_;
};

/// Deterministic stand-in for every prompting stage, driven by
/// ChatRequest::purpose and the structured hints the stages attach:
///
///   nouns              {batch_size, exclude}
///   extract            {page_text}
///   explore            {entity}
///   qa                 {graph}
///   prune              {question, answer}
///   validate_qa        {question, answer}
///   summarize          {query, content}
///   agent              {question, gold}
///   judge_correctness  {gold, answer}
///   judge_quality      {trajectory_text}
///   score              {gold, final_answer, tool_call_count, trajectory_text}
///
/// Its randomness comes only from ChatRequest::seed, so replies are identical
/// across runs and scheduling orders. It imitates realistic model drift:
/// numbered lists, noise entities, stray text, malformed calls, wrong or
/// paraphrased answers and the occasional hallucinated claim.
class SimulatedLlm : public ChatBackend {
 public:
  explicit SimulatedLlm(std::shared_ptr<const MockWorld> world);

  ChatResponse complete(const ChatRequest& request) override;

  /// Phrase the simulated policy uses when it claims a check it never made.
  static constexpr std::string_view kHallucinationPhrase = "I have verified this in the official registry";

 private:
  std::string nouns(const ChatRequest& r) const;
  std::string extract(const ChatRequest& r) const;
  std::string explore(const ChatRequest& r) const;
  std::string qa(const ChatRequest& r) const;
  std::string prune(const ChatRequest& r) const;
  std::string validate_qa(const ChatRequest& r) const;
  std::string summarize(const ChatRequest& r) const;
  std::string agent(const ChatRequest& r) const;
  std::string judge_correctness(const ChatRequest& r) const;
  std::string judge_quality(const ChatRequest& r) const;
  std::string score(const ChatRequest& r) const;

  std::shared_ptr<const MockWorld> world_;
};

}  // namespace deepforge

// SPDX-License-Identifier: Apache-2.0
#include "deepforge/qa/qa.hpp"

#include <spdlog/spdlog.h>

#include "deepforge/common/hash.hpp"
#include "deepforge/common/resources.hpp"
#include "deepforge/common/text.hpp"
#include "deepforge/datamodel/journal.hpp"
#include "deepforge/datamodel/serialize.hpp"

namespace deepforge {

using nlohmann::json;

namespace {

ChatResponse ask_model(const ChatClient& chat, std::vector<Message> messages, const std::string& purpose,
                       std::uint64_t seed, const std::string& model, json hints, const CancelToken* cancel) {
  ChatRequest req;
  req.messages = std::move(messages);
  req.purpose = purpose;
  req.seed = seed;
  req.model = model;
  req.hints = std::move(hints);
  return chat.chat(req, cancel);
}

std::optional<json> first_json_object(std::string_view text) {
  const auto open = text.find('{');
  const auto close = text.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
  json j = json::parse(text.substr(open, close - open + 1), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

}  // namespace

std::string serialize_graph_for_prompt(const EntityGraph& graph) {
  std::string out;
  for (const auto& [name, record] : graph.records) {
    json j = {{"entity", name}, {"entity_self", record.entity_self}, {"entity_relations", record.entity_relations}};
    out += j.dump(2) + "\n";
  }
  return out;
}

std::optional<std::string> extract_block(std::string_view text, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  const auto a = text.find(open);
  if (a == std::string_view::npos) return std::nullopt;
  const auto b = text.find(close, a + open.size());
  if (b == std::string_view::npos) return std::nullopt;
  return text::trim(text.substr(a + open.size(), b - a - open.size()));
}

QAPair generate_qa(const ChatClient& chat, const EntityGraph& graph, std::uint64_t seed, const std::string& model,
                   const CancelToken* cancel) {
  if (graph.records.empty() || !graph.records.count(graph.root)) {
    throw QaError("EmptyGraph", "graph '" + graph.id + "' has no record for its root");
  }
  std::vector<Message> messages = {Message::user(fill_template(
      prompt_template("qa"),
      {{"examples", std::string(prompt_template("qa_examples"))}, {"entity_infos", serialize_graph_for_prompt(graph)}}))};
  const json hints = {{"graph", graph}};
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string reply = ask_model(chat, messages, "qa", seed, model, hints, cancel).text;
    const auto question = extract_block(reply, "question");
    const auto answer = extract_block(reply, "answer");
    if (question && answer && !question->empty() && !answer->empty()) {
      QAPair qa;
      qa.id = compute_task_id(graph.id);
      qa.question = *question;
      qa.answer = *answer;
      qa.language = detect_language(qa.question);
      qa.provenance = {graph.root, graph.id, graph.depth};
      return qa;
    }
    messages.push_back(Message::assistant({Segment::plain(reply)}));
    messages.push_back(Message::user(std::string(kRepairNoticePrefix) +
                                     " it must contain a non-empty <question> block and a non-empty <answer> block."
                                     " Reply again in the required format."));
  }
  throw QaError("MalformedQaResponse", "QA reply for graph '" + graph.id + "' lacks <question>/<answer> after a repair");
}

QAPair prune_clues(const ChatClient& chat, const QAPair& qa, std::uint64_t seed, const std::string& model,
                   const CancelToken* cancel) {
  if (qa.pruned) throw PreconditionError("pair '" + qa.id + "' is already pruned");
  const std::string prompt =
      fill_template(prompt_template("prune"), {{"question", qa.question}, {"answer", qa.answer}});
  const std::string reply = ask_model(chat, {Message::user(prompt)}, "prune", seed, model,
                                      {{"question", qa.question}, {"answer", qa.answer}}, cancel)
                                .text;
  const auto question = extract_block(reply, "question");
  const auto answer = extract_block(reply, "answer");
  if (!question || question->empty()) {
    spdlog::warn("prune: rewrite of '{}' has no question; keeping the original", qa.id);
    return qa;
  }
  if (!answer || *answer != qa.answer) {
    spdlog::warn("prune: rewrite of '{}' changed the answer; keeping the original", qa.id);
    return qa;
  }
  QAPair out = qa;
  out.question = *question;
  out.language = detect_language(out.question);
  out.pruned = true;
  return out;
}

QaVerdict check_qa_rules(const QAPair& qa) {
  const std::string q = text::trim(qa.question);
  const std::string a = text::trim(qa.answer);
  if (q.empty() || a.empty()) return {false, "EmptyField", q.empty() ? "question is empty" : "answer is empty"};
  const std::size_t n = text::code_point_count(q);
  if (n < kMinQuestionChars) return {false, "TooShort", std::to_string(n) + " characters"};
  if (n > kMaxQuestionChars) return {false, "TooLong", std::to_string(n) + " characters"};
  if (text::contains(text::casefold(q), text::casefold(a))) return {false, "AnswerLeak", "answer appears in the question"};
  return {};
}

QaVerdict validate_qa(const ChatClient* chat, const QAPair& qa, std::uint64_t seed, const std::string& model,
                      const CancelToken* cancel) {
  QaVerdict v = check_qa_rules(qa);
  if (!v.accepted || !chat) return v;
  const std::string prompt =
      fill_template(prompt_template("validate_qa"), {{"question", qa.question}, {"answer", qa.answer}});
  std::string reply;
  try {
    reply = ask_model(*chat, {Message::user(prompt)}, "validate_qa", seed, model,
                      {{"question", qa.question}, {"answer", qa.answer}}, cancel)
                .text;
  } catch (const ProviderError& e) {
    if (e.kind() != "ProviderUnavailable") throw;
    spdlog::warn("validate: LLM check for '{}' unavailable, deterministic checks only: {}", qa.id, e.what());
    return v;
  }
  const auto j = first_json_object(reply);
  if (!j || !j->contains("acceptable") || !(*j)["acceptable"].is_boolean()) {
    return {false, "JudgeProtocol", "unparseable check reply: " + text::preview(reply)};
  }
  if (!(*j)["acceptable"].get<bool>()) return {false, "JudgeRejected", j->value("reason", std::string())};
  return v;
}

Stage2Result run_stage2(const ProviderSet& p, const std::vector<EntityGraph>& graphs, const Stage2Config& config,
                        const std::filesystem::path& out_path, const CancelToken* cancel) {
  StageJournal journal(out_path, StageJournal::progress_path_for(out_path));
  const std::size_t start = journal.completed();
  if (start > 0) spdlog::info("genqa: resuming at graph {} of {}", start, graphs.size());

  struct Outcome {
    std::optional<QAPair> qa;
    std::string status;
    std::string detail;
  };
  run_ordered<Outcome>(
      graphs.size() > start ? graphs.size() - start : 0, config.workers,
      [&](std::size_t i) {
        const EntityGraph& g = graphs[start + i];
        const std::uint64_t seed = HashBuilder().add(config.seed).add("genqa").add(g.id).value();
        Outcome out;
        try {
          QAPair qa = generate_qa(*p.chat, g, derive_seed(seed, "generate"), p.models.stage, cancel);
          if (config.prune) qa = prune_clues(*p.chat, qa, derive_seed(seed, "prune"), p.models.stage, cancel);
          QaVerdict v = config.validate
                            ? validate_qa(p.chat.get(), qa, derive_seed(seed, "validate"), p.models.stage, cancel)
                            : QaVerdict{};
          if (v.accepted) {
            out.qa = std::move(qa);
            out.status = "accepted";
          } else {
            out.status = "rejected:" + v.reason;
            out.detail = v.detail;
          }
        } catch (const QaError& e) {
          out.status = "failed";
          out.detail = e.what();
        } catch (const ProviderError& e) {
          if (e.kind() == "Cancelled") throw;
          out.status = "failed";
          out.detail = e.what();
        }
        return out;
      },
      [&](std::size_t i, ItemResult<Outcome>&& r) {
        if (!r.ok()) std::rethrow_exception(r.error);
        const EntityGraph& g = graphs[start + i];
        if (r.value->status == "failed") spdlog::warn("genqa: graph '{}' failed: {}", g.id, r.value->detail);
        std::vector<json> rows;
        if (r.value->qa) rows.emplace_back(*r.value->qa);
        journal.record(g.id, rows, r.value->status, r.value->detail);
      },
      cancel);
  if (cancel && cancel->cancelled()) throw ProviderError("Cancelled", "genqa stage interrupted");

  Stage2Result result;
  result.graphs = graphs.size();
  for (const auto& row : read_json_lines(StageJournal::progress_path_for(out_path))) {
    const std::string status = row.at("status").get<std::string>();
    if (status == "accepted") {
      ++result.accepted;
    } else if (status == "failed") {
      ++result.failed;
    } else {
      ++result.rejected[status.substr(status.find(':') + 1)];
    }
  }
  return result;
}

}  // namespace deepforge

// SPDX-License-Identifier: Apache-2.0
#include "deepforge/curation/filters.hpp"

#include <spdlog/spdlog.h>

#include "deepforge/common/hash.hpp"
#include "deepforge/common/resources.hpp"
#include "deepforge/common/text.hpp"
#include "deepforge/datamodel/journal.hpp"
#include "deepforge/datamodel/serialize.hpp"
#include "deepforge/datamodel/transcript.hpp"
#include "deepforge/providers/errors.hpp"

namespace deepforge {

using nlohmann::json;

namespace {

std::string ask_judge(const ChatClient& judge, const std::string& prompt, const std::string& purpose,
                      std::uint64_t seed, const std::string& model, json hints, const CancelToken* cancel) {
  ChatRequest req;
  req.messages = {Message::user(prompt)};
  req.purpose = purpose;
  req.seed = seed;
  req.model = model;
  req.hints = std::move(hints);
  return judge.chat(req, cancel).text;
}

}  // namespace

std::optional<json> parse_judge_json(std::string_view reply) {
  std::string_view body = reply;
  if (auto fence = reply.find("```"); fence != std::string_view::npos) {
    auto start = reply.find('\n', fence);
    auto end = start == std::string_view::npos ? start : reply.find("```", start);
    if (end != std::string_view::npos) body = reply.substr(start + 1, end - start - 1);
  }
  const auto open = body.find('{');
  const auto close = body.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
  json j = json::parse(body.substr(open, close - open + 1), nullptr, false, true);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

namespace {

std::optional<bool> parse_yes_no(std::string_view reply) {
  const std::string bare = text::casefold(text::trim(reply));
  if (bare == "yes") return true;
  if (bare == "no") return false;
  const auto j = parse_judge_json(reply);
  if (!j || !j->contains("equivalent")) return std::nullopt;
  const json& v = (*j)["equivalent"];
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const std::string s = text::casefold(text::trim(v.get<std::string>()));
    if (s == "yes") return true;
    if (s == "no") return false;
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(FilterStage s) {
  switch (s) {
    case FilterStage::InvalidToolResult: return "InvalidToolResult";
    case FilterStage::FormatError: return "FormatError";
    case FilterStage::TokenLength: return "TokenLength";
    case FilterStage::AnswerIncorrect: return "AnswerIncorrect";
    case FilterStage::QualityUnqualified: return "QualityUnqualified";
  }
  return "InvalidToolResult";
}

FilterStage parse_filter_stage(std::string_view s) {
  for (FilterStage stage : kFilterOrder) {
    if (to_string(stage) == s) return stage;
  }
  throw Error("SchemaMismatch", "unknown filter stage '" + std::string(s) + "'");
}

void to_json(json& j, const FilterVerdict& v) {
  j = json{{"trajectory_id", v.trajectory_id}, {"passed", v.passed}, {"details", v.details}};
  if (v.failed_stage) j["failed_stage"] = to_string(*v.failed_stage);
}

void from_json(const json& j, FilterVerdict& v) {
  v.trajectory_id = j.at("trajectory_id").get<std::string>();
  v.passed = j.at("passed").get<bool>();
  v.details = j.value("details", std::string());
  v.failed_stage.reset();
  if (j.contains("failed_stage")) v.failed_stage = parse_filter_stage(j.at("failed_stage").get<std::string>());
  if (v.passed == v.failed_stage.has_value()) throw Error("SchemaMismatch", "failed_stage must be present iff not passed");
}

std::vector<std::string> default_error_patterns() {
  return {"FetchFailure(",        "ProviderUnavailable", "NonHtmlContent",      "SandboxUnavailable",
          "EmptyQuery",           "Error: ",              "\"error\":",          "\"exit\":\"timeout\"",
          "\"exit\":\"error\"",   "Traceback (most recent call last)", "404 Not Found", "503 Service Unavailable"};
}

StageCheck filter_invalid_tool_results(const Trajectory& t, const std::vector<std::string>& patterns) {
  for (std::size_t i = 0; i < t.messages.size(); ++i) {
    for (const auto& s : t.messages[i].segments) {
      if (s.kind != SegmentKind::ToolResponse) continue;
      if (text::trim_view(s.text).empty()) return {false, "empty tool response at message " + std::to_string(i)};
      for (const auto& p : patterns) {
        if (text::contains(s.text, p)) {
          return {false, "tool response at message " + std::to_string(i) + " contains error marker '" + p + "'"};
        }
      }
    }
  }
  return {};
}

StageCheck filter_format(const Trajectory& t) {
  const FormatReport report = validate_trajectory(t);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    return {false, v.description};
  }
  for (std::size_t i = 0; i < t.messages.size(); ++i) {
    if (t.messages[i].role == Role::Assistant && has_plain_segments(t.messages[i])) {
      return {false, "text outside tags in message " + std::to_string(i)};
    }
  }
  return {};
}

StageCheck filter_token_length(const Trajectory& t, const Tokenizer& tok, std::size_t min_tokens,
                               std::size_t max_tokens) {
  const std::size_t n = tok.count(render_trajectory(t));
  if (n < min_tokens || n > max_tokens) {
    return {false, std::to_string(n) + " tokens outside [" + std::to_string(min_tokens) + ", " +
                       std::to_string(max_tokens) + "]"};
  }
  return {true, std::to_string(n) + " tokens"};
}

CorrectnessVerdict judge_correctness(const ChatClient* judge, const std::string& question, const std::string& gold,
                                     const std::string& answer, std::uint64_t seed, const std::string& model,
                                     const CancelToken* cancel) {
  if (text::trim_view(gold).empty()) throw PreconditionError("gold answer is empty");
  if (text::normalize_name(gold) == text::normalize_name(answer)) return {true, true};
  if (!judge) throw PreconditionError("no judge for a non-trivial comparison");
  const std::string prompt = fill_template(prompt_template("judge_correctness"),
                                           {{"question", question}, {"gold", gold}, {"answer", answer}});
  std::string last;
  for (int attempt = 0; attempt < 2; ++attempt) {
    last = ask_judge(*judge, prompt, "judge_correctness", seed + static_cast<std::uint64_t>(attempt), model,
                     {{"gold", gold}, {"answer", answer}}, cancel);
    if (auto v = parse_yes_no(last)) return {*v, false};
  }
  throw JudgeProtocol("correctness judge gave no yes/no verdict: " + text::preview(last));
}

QualityVerdict parse_quality_verdict(std::string_view reply) {
  const auto j = parse_judge_json(reply);
  if (!j) throw JudgeProtocol("quality verdict is not JSON: " + text::preview(reply));
  for (const char* key : {"quality_score", "reason", "issues"}) {
    if (!j->contains(key)) throw JudgeProtocol(std::string("quality verdict lacks \"") + key + "\"");
  }
  const json& score = (*j)["quality_score"];
  if (!score.is_string() || (score != "Qualified" && score != "Unqualified")) {
    throw JudgeProtocol("quality_score must be \"Qualified\" or \"Unqualified\"");
  }
  if (!(*j)["reason"].is_string()) throw JudgeProtocol("reason must be a string");
  const json& issues = (*j)["issues"];
  if (!issues.is_array()) throw JudgeProtocol("issues must be a list");
  QualityVerdict v;
  v.qualified = score == "Qualified";
  v.reason = (*j)["reason"].get<std::string>();
  for (const auto& i : issues) {
    if (!i.is_string()) throw JudgeProtocol("issues must be strings");
    v.issues.push_back(i.get<std::string>());
  }
  if (v.qualified != v.issues.empty()) throw JudgeProtocol("issues must be empty exactly when qualified");
  return v;
}

QualityVerdict judge_quality(const ChatClient& judge, const Trajectory& t, std::uint64_t seed,
                             const std::string& model, const CancelToken* cancel) {
  const std::string trajectory_text = render_trajectory(t);
  const std::string prompt = fill_template(prompt_template("judge_quality"),
                                           {{"question", t.query},
                                            {"answer", t.gold_answer.value_or("")},
                                            {"model_response", t.final_answer.value_or("")},
                                            {"trajectory_text", trajectory_text}});
  std::string last;
  for (int attempt = 0; attempt < 2; ++attempt) {
    last = ask_judge(judge, prompt, "judge_quality", seed + static_cast<std::uint64_t>(attempt), model,
                     {{"trajectory_text", trajectory_text}}, cancel);
    try {
      return parse_quality_verdict(last);
    } catch (const JudgeProtocol& e) {
      if (attempt == 1) throw;
      spdlog::debug("quality judge reply unusable, retrying: {}", e.what());
    }
  }
  throw JudgeProtocol("unreachable");
}

FilterVerdict filter_trajectory(const ProviderSet& p, const Trajectory& t, const FilterConfig& config,
                                const Tokenizer& tok, const CancelToken* cancel) {
  FilterVerdict v;
  v.trajectory_id = t.id;
  auto reject = [&](FilterStage stage, std::string details) {
    v.passed = false;
    v.failed_stage = stage;
    v.details = std::move(details);
    return v;
  };
  if (auto c = filter_invalid_tool_results(t, config.error_patterns); !c.pass) {
    return reject(FilterStage::InvalidToolResult, c.details);
  }
  if (auto c = filter_format(t); !c.pass) return reject(FilterStage::FormatError, c.details);
  if (auto c = filter_token_length(t, tok, config.min_tokens, config.max_tokens); !c.pass) {
    return reject(FilterStage::TokenLength, c.details);
  }
  const std::uint64_t seed = HashBuilder().add(config.seed).add("filter").add(t.id).value();
  if (!t.final_answer) return reject(FilterStage::AnswerIncorrect, "no final answer");
  if (!t.gold_answer || text::trim_view(*t.gold_answer).empty()) {
    return reject(FilterStage::AnswerIncorrect, "no reference answer");
  }
  try {
    const auto c = judge_correctness(p.chat.get(), t.query, *t.gold_answer, *t.final_answer,
                                     derive_seed(seed, "correctness"), p.models.judge, cancel);
    if (!c.equivalent) return reject(FilterStage::AnswerIncorrect, "judge: not equivalent to the reference");
  } catch (const JudgeProtocol& e) {
    return reject(FilterStage::AnswerIncorrect, e.what());
  }
  try {
    const auto q = judge_quality(*p.chat, t, derive_seed(seed, "quality"), p.models.judge, cancel);
    if (!q.qualified) return reject(FilterStage::QualityUnqualified, text::join(q.issues, "; ") + ": " + q.reason);
  } catch (const JudgeProtocol& e) {
    return reject(FilterStage::QualityUnqualified, e.what());
  }
  return v;
}

FilterOutcome run_filter_pipeline(const ProviderSet& p, const std::vector<Trajectory>& trajectories,
                                  const FilterConfig& config, const Tokenizer& tok, const CancelToken* cancel) {
  FilterOutcome out;
  run_ordered<FilterVerdict>(
      trajectories.size(), config.workers,
      [&](std::size_t i) { return filter_trajectory(p, trajectories[i], config, tok, cancel); },
      [&](std::size_t i, ItemResult<FilterVerdict>&& r) {
        if (!r.ok()) std::rethrow_exception(r.error);
        if (r.value->passed) {
          out.kept.push_back(trajectories[i]);
        } else {
          ++out.rejected_by_stage[to_string(*r.value->failed_stage)];
        }
        out.verdicts.push_back(std::move(*r.value));
      },
      cancel);
  if (cancel && cancel->cancelled()) throw ProviderError("Cancelled", "filter interrupted");
  return out;
}

FilterOutcome run_filter_stage(const ProviderSet& p, const std::vector<Trajectory>& trajectories,
                               const FilterConfig& config, const Tokenizer& tok, const std::filesystem::path& kept_path,
                               const std::filesystem::path& verdicts_path, const CancelToken* cancel) {
  StageJournal journal(verdicts_path, StageJournal::progress_path_for(verdicts_path));
  const std::size_t start = journal.completed();
  if (start > 0) spdlog::info("filter: resuming at trajectory {} of {}", start, trajectories.size());
  run_ordered<FilterVerdict>(
      trajectories.size() > start ? trajectories.size() - start : 0, config.workers,
      [&](std::size_t i) { return filter_trajectory(p, trajectories[start + i], config, tok, cancel); },
      [&](std::size_t, ItemResult<FilterVerdict>&& r) {
        if (!r.ok()) std::rethrow_exception(r.error);
        const FilterVerdict& v = *r.value;
        journal.record(v.trajectory_id, {json(v)}, v.passed ? "kept" : to_string(*v.failed_stage));
      },
      cancel);
  if (cancel && cancel->cancelled()) throw ProviderError("Cancelled", "filter interrupted");

  FilterOutcome out;
  out.verdicts = read_records<FilterVerdict>(verdicts_path);
  if (out.verdicts.size() != trajectories.size()) {
    throw PersistenceError("SchemaMismatch", verdicts_path.string() + " does not match the trajectory input");
  }
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const FilterVerdict& v = out.verdicts[i];
    if (v.trajectory_id != trajectories[i].id) {
      throw PersistenceError("SchemaMismatch", "verdict " + std::to_string(i) + " belongs to another trajectory");
    }
    if (v.passed) {
      out.kept.push_back(trajectories[i]);
    } else {
      ++out.rejected_by_stage[to_string(*v.failed_stage)];
    }
  }
  write_records(kept_path, out.kept);
  return out;
}

}  // namespace deepforge

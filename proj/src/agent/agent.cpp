// SPDX-License-Identifier: Apache-2.0
#include "deepforge/agent/agent.hpp"

#include <spdlog/spdlog.h>

#include "deepforge/common/hash.hpp"
#include "deepforge/common/json_schema.hpp"
#include "deepforge/common/resources.hpp"
#include "deepforge/common/text.hpp"
#include "deepforge/datamodel/journal.hpp"
#include "deepforge/datamodel/serialize.hpp"
#include "deepforge/datamodel/transcript.hpp"
#include "deepforge/providers/errors.hpp"

namespace deepforge {

using nlohmann::json;

namespace {

/// Observations may quote markup; a literal protocol tag inside a tool
/// response would end the block early.
std::string defang_tags(std::string s) {
  for (const auto& tag : GrammarProfile::agent().tags()) {
    s = text::replace_all(std::move(s), "</" + tag + ">", "&lt;/" + tag + "&gt;");
    s = text::replace_all(std::move(s), "<" + tag + ">", "&lt;" + tag + "&gt;");
  }
  return s;
}

std::vector<std::string> string_list(const json& v) {
  if (v.is_string()) return {v.get<std::string>()};
  return v.get<std::vector<std::string>>();
}

std::string repair_notice(const std::string& problem) {
  return std::string(kRepairNoticePrefix) + " " + problem +
         " Reply again: reason inside <think> tags, then give exactly one <tool_call> or the final <answer>.";
}

}  // namespace

void ToolRegistry::add(ToolSpec spec) {
  if (tools_.count(spec.name) || aliases_.count(spec.name)) {
    throw PreconditionError("tool '" + spec.name + "' registered twice");
  }
  if (!spec.schema.is_object() || !spec.schema.contains("parameters")) {
    throw PreconditionError("tool '" + spec.name + "' has no parameter schema");
  }
  if (!spec.dispatch) throw PreconditionError("tool '" + spec.name + "' has no dispatcher");
  std::string name = spec.name;
  tools_.emplace(std::move(name), std::move(spec));
}

void ToolRegistry::alias(const std::string& alias, const std::string& canonical) {
  if (tools_.count(alias) || !tools_.count(canonical)) {
    throw PreconditionError("alias '" + alias + "' -> '" + canonical + "' is invalid");
  }
  aliases_[alias] = canonical;
}

const ToolSpec* ToolRegistry::find(const std::string& name) const {
  auto it = tools_.find(name);
  if (it == tools_.end()) {
    auto a = aliases_.find(name);
    if (a == aliases_.end()) return nullptr;
    it = tools_.find(a->second);
  }
  return &it->second;
}

std::vector<std::string> ToolRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, spec] : tools_) out.push_back(name);
  return out;
}

std::string ToolRegistry::schemas_text() const {
  std::string out;
  for (const auto& [name, spec] : tools_) out += spec.schema.dump() + "\n";
  return out;
}

std::string ToolRegistry::call(const ToolCall& call, const CancelToken* cancel) const {
  const ToolSpec* spec = find(call.name);
  if (!spec) return "Error: unknown tool '" + call.name + "'. Available tools: " + text::join(names(), ", ") + ".";
  const auto problems = validate_json_schema(spec->schema.at("parameters"), call.arguments);
  if (!problems.empty()) return "Error: invalid arguments for " + spec->name + ": " + text::join(problems, "; ");
  try {
    return spec->dispatch(call.arguments, cancel);
  } catch (const ProviderError& e) {
    if (e.kind() == "Cancelled") throw;
    return std::string("Error: ") + e.what();
  } catch (const PreconditionError& e) {
    return std::string("Error: ") + e.what();
  }
}

void RunLimits::validate() const {
  if (max_turns <= 0 || max_context_tokens == 0 || !(per_tool_timeout_seconds > 0)) {
    throw PreconditionError("run limits must all be positive");
  }
}

json tool_visit_urls(const ProviderSet& p, const std::vector<std::string>& urls, const std::string& query,
                     std::uint64_t seed, const CancelToken* cancel) {
  json out = json::array();
  for (const auto& url : urls) {
    try {
      std::string page = p.fetch->fetch_and_clean(url, cancel);
      if (page.size() > kMaxSummaryInputChars) page.resize(kMaxSummaryInputChars);
      ChatRequest req;
      req.messages = {Message::user(fill_template(prompt_template("summarize"), {{"query", query}, {"content", page}}))};
      req.purpose = "summarize";
      req.model = p.models.summarizer;
      req.seed = HashBuilder().add(seed).add("summarize").add(url).value();
      req.hints = {{"query", query}, {"content", page}};
      out.push_back({{"url", url}, {"summary", p.chat->chat(req, cancel).text}});
    } catch (const ProviderError& e) {
      if (e.kind() == "Cancelled") throw;
      out.push_back({{"url", url}, {"error", e.what()}});
    }
  }
  return out;
}

ToolRegistry standard_registry(const ProviderSet& p, const RunLimits& limits, std::uint64_t seed) {
  ToolRegistry reg;
  reg.add({"search", tool_schema("search"), [&p](const json& args, const CancelToken* cancel) {
             const auto results = p.search->search(string_list(args.at("query")), cancel);
             return json{{"tool", "search"}, {"result", results}}.dump();
           }});
  reg.add({"visit_urls", tool_schema("visit_urls"), [&p, seed](const json& args, const CancelToken* cancel) {
             const auto urls = args.at("urls").get<std::vector<std::string>>();
             const std::string query = args.value("query", std::string());
             return json{{"tool", "visit_urls"}, {"result", tool_visit_urls(p, urls, query, seed, cancel)}}.dump();
           }});
  reg.add({"search_wiki", tool_schema("search_wiki"), [&p](const json& args, const CancelToken* cancel) {
             const auto entries = p.wiki->lookup(string_list(args.at("entities")), cancel);
             return json{{"tool", "search_wiki"}, {"result", entries}}.dump();
           }});
  ExecLimits exec = p.exec_limits;
  exec.wall_seconds = std::min(exec.wall_seconds, limits.per_tool_timeout_seconds);
  reg.add({"execute_code", tool_schema("execute_code"), [&p, exec](const json& args, const CancelToken* cancel) {
             const ExecResult r = p.sandbox->execute_code(args.at("code").get<std::string>(), exec, cancel);
             return json{{"tool", "execute_code"}, {"result", r}}.dump();
           }});
  reg.alias("code_execution", "execute_code");
  return reg;
}

Trajectory run_agent(const AgentTask& task, const ChatClient& policy, const ToolRegistry& registry,
                     const RunLimits& limits, const Tokenizer& tokenizer, const std::string& model,
                     double temperature, AgentStats* stats, const CancelToken* cancel) {
  limits.validate();
  AgentStats local;
  AgentStats& st = stats ? *stats : local;
  Trajectory t;
  t.task_id = task.task_id;
  t.rollout_index = task.rollout_index;
  t.query = task.query;
  t.gold_answer = task.gold_answer;

  std::vector<Message> context = {
      Message::system(fill_template(prompt_template("agent_system"), {{"tool_schemas", registry.schemas_text()}})),
      Message::user(task.query)};
  json hints = {{"question", task.query}};
  if (task.gold_answer) hints["gold"] = *task.gold_answer;

  auto finish = [&](TrajectoryStatus status, std::string detail) {
    t.status = status;
    t.detail = std::move(detail);
    t.id = compute_trajectory_id(t);
    return t;
  };

  for (int turn = 0;; ++turn) {
    if (turn >= limits.max_turns) {
      return finish(TrajectoryStatus::Truncated, "turn limit of " + std::to_string(limits.max_turns) + " reached");
    }
    std::vector<Message> attempt_context = context;
    std::optional<Message> reply_msg;
    for (int attempt = 0; attempt < 2 && !reply_msg; ++attempt) {
      const std::size_t tokens = tokenizer.count(render_prompt(attempt_context));
      st.peak_context_tokens = std::max(st.peak_context_tokens, tokens);
      if (tokens > limits.max_context_tokens) {
        return finish(TrajectoryStatus::Truncated, "context of " + std::to_string(tokens) + " tokens exceeds the " +
                                                       std::to_string(limits.max_context_tokens) + " token budget");
      }
      ChatRequest req;
      req.messages = attempt_context;
      req.purpose = "agent";
      req.model = model;
      req.seed = task.seed;
      req.temperature = temperature;
      req.hints = hints;
      std::string reply;
      try {
        reply = policy.chat(req, cancel).text;
      } catch (const ProviderError& e) {
        if (e.kind() == "Cancelled") throw;
        return finish(TrajectoryStatus::Failed, e.what());
      }
      ++st.policy_calls;
      std::string problem;
      try {
        Message m = parse_assistant_message(reply);
        const auto problems = check_message(m);
        if (problems.empty()) {
          reply_msg = std::move(m);
          break;
        }
        problem = text::join(problems, "; ") + ".";
      } catch (const TranscriptError& e) {
        problem = std::string(e.what()) + ".";
      }
      if (attempt == 1) return finish(TrajectoryStatus::Failed, "unusable reply after a repair: " + problem);
      ++st.repairs;
      attempt_context.push_back(Message::assistant({Segment::plain(reply)}));
      attempt_context.push_back(Message::user(repair_notice(problem)));
    }

    const Message& msg = *reply_msg;
    t.messages.push_back(msg);
    context.push_back(msg);
    const Segment* terminal = nullptr;
    for (const auto& s : msg.segments) {
      if (s.kind == SegmentKind::ToolCall || s.kind == SegmentKind::Answer) terminal = &s;
    }
    if (terminal->kind == SegmentKind::Answer) {
      t.final_answer = terminal->text;
      return finish(TrajectoryStatus::Complete, {});
    }
    ++t.tool_call_count;
    std::string observation = defang_tags(registry.call(*terminal->tool_call, cancel));
    t.messages.push_back(Message::tool(observation));
    context.push_back(t.messages.back());
  }
}

SampleResult sample_trajectories(const ProviderSet& p, const std::vector<QAPair>& tasks, const SampleConfig& config,
                                 const Tokenizer& tokenizer, const std::filesystem::path& out_path,
                                 const CancelToken* cancel) {
  if (config.rollouts < 1) throw PreconditionError("rollouts must be >= 1");
  config.limits.validate();
  const std::size_t k = static_cast<std::size_t>(config.rollouts);
  const std::size_t total = tasks.size() * k;
  StageJournal journal(out_path, StageJournal::progress_path_for(out_path));
  const std::size_t start = journal.completed();
  if (start > 0) spdlog::info("collect: resuming at rollout {} of {}", start, total);

  run_ordered<Trajectory>(
      total > start ? total - start : 0, config.workers,
      [&](std::size_t i) {
        const QAPair& qa = tasks[(start + i) / k];
        const int rollout = static_cast<int>((start + i) % k);
        AgentTask task;
        task.task_id = qa.id;
        task.rollout_index = rollout;
        task.query = qa.question;
        task.gold_answer = qa.answer;
        task.seed = HashBuilder().add(config.seed).add("rollout").add(qa.id).add(static_cast<std::uint64_t>(rollout)).value();
        const ToolRegistry registry = standard_registry(p, config.limits, task.seed);
        return run_agent(task, *p.chat, registry, config.limits, tokenizer, p.models.policy, config.temperature,
                         nullptr, cancel);
      },
      [&](std::size_t, ItemResult<Trajectory>&& r) {
        if (!r.ok()) std::rethrow_exception(r.error);
        const Trajectory& t = *r.value;
        if (t.status == TrajectoryStatus::Failed && t.detail.rfind("ProviderUnavailable", 0) == 0) {
          throw ProviderError("ProviderUnavailable", "policy outage during " + t.task_id + ": " + t.detail);
        }
        if (t.status != TrajectoryStatus::Complete) {
          spdlog::info("collect: {} rollout {} ended {}: {}", t.task_id, t.rollout_index, to_string(t.status), t.detail);
        }
        journal.record(t.task_id + "#" + std::to_string(t.rollout_index), {json(t)}, to_string(t.status), t.detail);
      },
      cancel);
  if (cancel && cancel->cancelled()) throw ProviderError("Cancelled", "collect stage interrupted");

  SampleResult result;
  result.tasks = tasks.size();
  for (const auto& row : read_json_lines(StageJournal::progress_path_for(out_path))) {
    ++result.trajectories;
    ++result.by_status[row.at("status").get<std::string>()];
  }
  return result;
}

}  // namespace deepforge

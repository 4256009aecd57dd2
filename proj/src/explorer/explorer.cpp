// SPDX-License-Identifier: Apache-2.0
#include "deepforge/explorer/explorer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <spdlog/spdlog.h>

#include "deepforge/common/hash.hpp"
#include "deepforge/common/json_schema.hpp"
#include "deepforge/common/resources.hpp"
#include "deepforge/common/rng.hpp"
#include "deepforge/common/text.hpp"
#include "deepforge/datamodel/journal.hpp"
#include "deepforge/datamodel/serialize.hpp"
#include "deepforge/datamodel/transcript.hpp"
#include "deepforge/providers/errors.hpp"

namespace deepforge {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxCrawlChars = 8000;
const std::vector<std::string> kExplorerTools = {"search_google", "crawl_url_content", "search_wiki"};

std::string tool_schemas_text() {
  std::string out;
  for (const auto& name : kExplorerTools) out += explorer_schema(name).dump(2) + "\n";
  return out;
}

std::string repair_notice(const std::string& problem) {
  return std::string(kRepairNoticePrefix) + " " + problem +
         " Reply again with exactly one <function_call> block, or with the final <result> block.";
}

/// Runs the explorer conversation for one entity.
class Conversation {
 public:
  Conversation(const ProviderSet& p, const ExploreOptions& o, int& calls_left, ExploreTrace& trace,
               const CancelToken* cancel)
      : p_(p), o_(o), calls_left_(calls_left), trace_(trace), cancel_(cancel) {}

  EntityRecord run(const Entity& entity, std::uint64_t seed) {
    std::vector<Message> messages;
    messages.push_back(Message::user(fill_template(
        prompt_template("explorer"),
        {{"tool_schemas", tool_schemas_text()}, {"name", entity.name}, {"description", entity.description.value_or("")}})));
    bool repair_pending = false;
    for (int turn = 0; turn < o_.budget.max_agent_turns; ++turn) {
      ChatRequest req;
      req.messages = messages;
      req.purpose = "explore";
      req.seed = seed;
      req.model = p_.models.stage;
      req.hints = {{"entity", entity.name}};
      const std::string reply = p_.chat->chat(req, cancel_).text;
      ++trace_.agent_turns;

      std::string problem;
      Message parsed;
      try {
        parsed = parse_assistant_message(reply, GrammarProfile::explorer());
      } catch (const TranscriptError& e) {
        problem = e.what();
      }
      const Segment* call = nullptr;
      bool has_result = false;
      if (problem.empty()) {
        int calls = 0;
        for (const auto& s : parsed.segments) {
          if (s.kind == SegmentKind::ToolCall) {
            call = &s;
            ++calls;
          }
          if (s.kind == SegmentKind::Answer) has_result = true;
        }
        if (calls > 1) {
          problem = "the reply has " + std::to_string(calls) + " <function_call> blocks; output only one at a time.";
        } else if (!call && !has_result) {
          problem = "the reply has neither a <function_call> nor a <result> block.";
        }
      }
      if (problem.empty() && has_result) {
        try {
          EntityRecord record = parse_result_block(reply);
          record.entity = entity;
          std::erase_if(record.entity_relations, [&](const auto& kv) {
            return text::normalize_name(kv.first) == text::normalize_name(entity.name);
          });
          if (record.entity_self.empty() && record.entity_relations.empty()) {
            throw ExplorerError("MalformedResult", "result for '" + entity.name + "' is empty");
          }
          return record;
        } catch (const ExplorerError& e) {
          problem = e.what();
        }
      }
      if (!problem.empty()) {
        if (repair_pending) throw ExplorerError("MalformedResult", "explorer for '" + entity.name + "': " + problem);
        repair_pending = true;
        ++trace_.repairs;
        messages.push_back(Message::assistant({Segment::plain(reply)}));
        messages.push_back(Message::user(repair_notice(problem)));
        continue;
      }
      repair_pending = false;
      messages.push_back(parsed);
      messages.push_back(Message::tool(dispatch(*call->tool_call)));
    }
    throw ExplorerError("BudgetExhausted", "no <result> for '" + entity.name + "' within " +
                                               std::to_string(o_.budget.max_agent_turns) + " turns");
  }

 private:
  std::string dispatch(const ToolCall& call) {
    if (std::find(kExplorerTools.begin(), kExplorerTools.end(), call.name) == kExplorerTools.end()) {
      return "Error: unknown tool '" + call.name + "'. Available tools: search_google, crawl_url_content, search_wiki.";
    }
    const auto problems = validate_json_schema(explorer_schema(call.name).at("parameters"), call.arguments);
    if (!problems.empty()) return "Error: invalid arguments for " + call.name + ": " + text::join(problems, "; ");
    if (calls_left_ <= 0) throw ExplorerError("BudgetExhausted", "tool call budget exhausted");
    --calls_left_;
    ++trace_.tool_calls;
    trace_.dispatched.push_back(call.name);
    try {
      if (call.name == "search_google") {
        const auto r = p_.search->search_one(call.arguments.at("query").get<std::string>(), cancel_);
        return json{{"tool", call.name}, {"result", {r}}}.dump();
      }
      if (call.name == "crawl_url_content") {
        std::string page = p_.fetch->fetch_and_clean(call.arguments.at("url").get<std::string>(), cancel_);
        if (page.size() > kMaxCrawlChars) page.resize(kMaxCrawlChars);
        return page.empty() ? "The page has no readable text." : page;
      }
      const auto entries = p_.wiki->lookup(call.arguments.at("entities").get<std::vector<std::string>>(), cancel_);
      return json{{"tool", call.name}, {"result", entries}}.dump();
    } catch (const ProviderError& e) {
      if (e.kind() == "Cancelled" || e.kind() == "ProviderUnavailable") throw;
      return std::string("Error: ") + e.what();
    } catch (const PreconditionError& e) {
      return std::string("Error: ") + e.what();
    }
  }

  const ProviderSet& p_;
  const ExploreOptions& o_;
  int& calls_left_;
  ExploreTrace& trace_;
  const CancelToken* cancel_;
};

}  // namespace

DepthDistribution parse_depth_dist(std::string_view spec) {
  DepthDistribution d;
  for (const auto& part : text::split(spec, ',')) {
    const std::string item = text::trim(part);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ExplorerError("InvalidDistribution", "expected depth:weight, got '" + item + "'");
    const std::string ds = text::trim(item.substr(0, colon));
    const std::string ws = text::trim(item.substr(colon + 1));
    int depth = 0;
    auto [p1, e1] = std::from_chars(ds.data(), ds.data() + ds.size(), depth);
    if (e1 != std::errc() || p1 != ds.data() + ds.size()) throw ExplorerError("InvalidDistribution", "bad depth '" + ds + "'");
    double weight = 0;
    auto [p2, e2] = std::from_chars(ws.data(), ws.data() + ws.size(), weight);
    if (e2 != std::errc() || p2 != ws.data() + ws.size()) throw ExplorerError("InvalidDistribution", "bad weight '" + ws + "'");
    if (d.weights.count(depth)) throw ExplorerError("InvalidDistribution", "depth " + ds + " listed twice");
    d.weights[depth] = weight;
  }
  validate_depth_dist(d);
  return d;
}

void validate_depth_dist(const DepthDistribution& dist) {
  double total = 0;
  for (const auto& [depth, w] : dist.weights) {
    if (depth < 1) throw ExplorerError("InvalidDistribution", "depth " + std::to_string(depth) + " is not positive");
    if (!std::isfinite(w) || w < 0) throw ExplorerError("InvalidDistribution", "weight for depth " + std::to_string(depth) + " must be finite and >= 0");
    total += w;
  }
  if (!(total > 0)) throw ExplorerError("InvalidDistribution", "no positive weight");
}

int sample_depth(const DepthDistribution& dist, std::uint64_t seed) {
  validate_depth_dist(dist);
  double total = 0;
  for (const auto& [depth, w] : dist.weights) total += w;
  const double u = Rng(seed).uniform() * total;
  double acc = 0;
  int last = dist.weights.begin()->first;
  for (const auto& [depth, w] : dist.weights) {
    if (w <= 0) continue;
    acc += w;
    last = depth;
    if (u < acc) return depth;
  }
  return last;
}

EntityRecord parse_result_block(std::string_view text) {
  const auto open = text.find("<result>");
  const auto close = open == std::string_view::npos ? open : text.find("</result>", open);
  if (open == std::string_view::npos || close == std::string_view::npos) {
    throw ExplorerError("NoResultBlock", "no <result>...</result> span");
  }
  const std::string_view body = text.substr(open + 8, close - open - 8);
  const json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw ExplorerError("MalformedResult", "result block is not valid JSON");
  if (!j.is_object()) throw ExplorerError("WrongType", "result must be a JSON object");
  for (const char* key : {"entity_self", "entity_relations"}) {
    if (!j.contains(key)) throw ExplorerError("MissingKey", std::string("result lacks \"") + key + "\"");
  }
  EntityRecord r;
  const json& self = j["entity_self"];
  if (!self.is_array()) throw ExplorerError("WrongType", "entity_self must be an array of strings");
  for (const auto& f : self) {
    if (!f.is_string()) throw ExplorerError("WrongType", "entity_self must be an array of strings");
    std::string fact = text::trim(f.get<std::string>());
    if (!fact.empty()) r.entity_self.push_back(std::move(fact));
  }
  const json& rel = j["entity_relations"];
  if (!rel.is_object()) throw ExplorerError("WrongType", "entity_relations must be an object of strings");
  for (const auto& [k, v] : rel.items()) {
    if (!v.is_string()) throw ExplorerError("WrongType", "entity_relations must be an object of strings");
    const std::string key = text::trim(k);
    if (key.empty()) throw ExplorerError("WrongType", "entity_relations has an empty entity name");
    r.entity_relations[key] = v.get<std::string>();
  }
  return r;
}

std::vector<std::string> select_expansion_frontier(const EntityRecord& record, std::size_t k,
                                                   const std::set<std::string>& high_frequency,
                                                   const std::set<std::string>& exclude) {
  if (k == 0) return {};
  const std::string self = text::normalize_name(record.entity.name);
  std::vector<std::string> rare;
  std::vector<std::string> common;
  for (const auto& [target, relation] : record.entity_relations) {
    const std::string key = text::normalize_name(target);
    if (key == self || exclude.count(target)) continue;
    (high_frequency.count(key) ? common : rare).push_back(target);
  }
  auto order = [](const std::string& a, const std::string& b) {
    const auto la = text::code_point_count(a);
    const auto lb = text::code_point_count(b);
    return la != lb ? la < lb : a < b;
  };
  std::sort(rare.begin(), rare.end(), order);
  std::sort(common.begin(), common.end(), order);
  rare.insert(rare.end(), common.begin(), common.end());
  if (rare.size() > k) rare.resize(k);
  return rare;
}

EntityGraph explore_entity(const ProviderSet& p, const Entity& seed, int depth, const ExploreOptions& o,
                           ExploreTrace* trace, const CancelToken* cancel) {
  if (depth < 0) throw PreconditionError("depth must be >= 0");
  if (o.budget.max_agent_turns <= 0 || o.budget.max_calls <= 0) throw PreconditionError("budgets must be positive");
  ExploreTrace local;
  ExploreTrace& t = trace ? *trace : local;
  int calls_left = o.budget.max_calls;
  Conversation conv(p, o, calls_left, t, cancel);
  auto seed_for = [&](const std::string& name) {
    return HashBuilder().add(o.seed).add("explore").add(seed.name).add(name).value();
  };

  EntityGraph g;
  g.root = seed.name;
  g.depth = depth;
  g.records[seed.name] = conv.run(seed, seed_for(seed.name));

  std::vector<std::string> level = {seed.name};
  try {
    for (int d = 0; d < depth && !level.empty(); ++d) {
      std::vector<std::string> next;
      for (const auto& name : level) {
        std::set<std::string> known;
        for (const auto& [n, r] : g.records) known.insert(n);
        for (const auto& target : select_expansion_frontier(g.records.at(name), o.frontier_k, o.high_frequency, known)) {
          if (g.records.count(target)) continue;
          Entity e;
          e.name = target;
          e.origin_noun = seed.origin_noun;
          try {
            g.records[target] = conv.run(e, seed_for(target));
            next.push_back(target);
          } catch (const ExplorerError& err) {
            if (err.kind() == "BudgetExhausted") throw;
            spdlog::info("explore: neighbor '{}' of '{}' left unexplored: {}", target, seed.name, err.what());
          }
        }
      }
      level = std::move(next);
    }
  } catch (const ExplorerError& err) {
    if (err.kind() != "BudgetExhausted") throw;
    spdlog::info("explore: graph for '{}' truncated: {}", seed.name, err.what());
    g.truncated = true;
  }

  std::set<std::string> frontier;
  for (const auto& [name, record] : g.records) {
    for (const auto& [target, rel] : record.entity_relations) {
      if (!g.records.count(target)) frontier.insert(target);
    }
  }
  g.frontier.assign(frontier.begin(), frontier.end());
  g.id = compute_graph_id(g);
  return g;
}

ExploreStageResult run_explore_stage(const ProviderSet& p, const std::vector<Entity>& seeds,
                                     const ExploreStageConfig& config, const std::filesystem::path& out_path,
                                     const CancelToken* cancel) {
  validate_depth_dist(config.depth_dist);
  std::size_t n = seeds.size();
  if (config.max_seeds > 0) n = std::min(n, config.max_seeds);
  StageJournal journal(out_path, StageJournal::progress_path_for(out_path));
  ExploreStageResult result;
  result.seeds = n;
  const std::size_t start = journal.completed();
  if (start > 0) spdlog::info("explore: resuming at seed {} of {}", start, n);

  struct Outcome {
    std::optional<EntityGraph> graph;
    std::string detail;
  };
  run_ordered<Outcome>(
      n > start ? n - start : 0, config.workers,
      [&](std::size_t i) {
        const Entity& seed = seeds[start + i];
        Outcome out;
        const int depth = sample_depth(config.depth_dist, derive_seed(config.options.seed, "depth:" + seed.name));
        try {
          out.graph = explore_entity(p, seed, depth, config.options, nullptr, cancel);
        } catch (const ExplorerError& e) {
          out.detail = e.what();
        } catch (const ProviderError& e) {
          if (e.kind() == "Cancelled") throw;
          out.detail = e.what();
        }
        return out;
      },
      [&](std::size_t i, ItemResult<Outcome>&& r) {
        if (!r.ok()) std::rethrow_exception(r.error);
        const Entity& seed = seeds[start + i];
        if (r.value->graph) {
          journal.record(seed.name, {json(*r.value->graph)}, r.value->graph->truncated ? "truncated" : "ok");
        } else {
          spdlog::warn("explore: seed '{}' failed: {}", seed.name, r.value->detail);
          journal.record(seed.name, {}, "failed", r.value->detail);
        }
      },
      cancel);
  if (cancel && cancel->cancelled()) throw ProviderError("Cancelled", "explore stage interrupted");
  for (const auto& row : read_json_lines(StageJournal::progress_path_for(out_path))) {
    const std::string status = row.at("status").get<std::string>();
    if (status == "failed") {
      ++result.failed;
    } else {
      ++result.graphs;
      if (status == "truncated") ++result.truncated;
    }
  }
  return result;
}

}  // namespace deepforge

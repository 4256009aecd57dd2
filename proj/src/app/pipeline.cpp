// SPDX-License-Identifier: Apache-2.0
#include "deepforge/app/pipeline.hpp"

#include <fstream>
#include <set>

#include <spdlog/spdlog.h>

#include "deepforge/analytics/analytics.hpp"
#include "deepforge/common/hash.hpp"
#include "deepforge/datamodel/jsonl.hpp"
#include "deepforge/datamodel/serialize.hpp"

namespace deepforge {

using nlohmann::json;

namespace {

const char* const kProviders[] = {"llm", "search", "fetch", "wiki", "sandbox"};

std::size_t positive(const Config& c, const std::string& key, std::int64_t fallback) {
  const auto v = c.get_int(key, fallback);
  if (v < 1) throw ConfigError(key + " must be >= 1, got " + std::to_string(v));
  return static_cast<std::size_t>(v);
}

std::size_t non_negative(const Config& c, const std::string& key, std::int64_t fallback) {
  const auto v = c.get_int(key, fallback);
  if (v < 0) throw ConfigError(key + " must be >= 0, got " + std::to_string(v));
  return static_cast<std::size_t>(v);
}

/// Keys that change scheduling but never outputs; a resume may alter them.
bool scheduling_key(const std::string& key) {
  return key.size() > 8 && key.compare(key.size() - 8, 8, ".workers") == 0;
}

std::string snapshot_text(const Config& c) {
  std::string out;
  for (const auto& [k, v] : c.entries()) {
    if (!scheduling_key(k)) out += k + " = " + v + "\n";
  }
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& p, const std::string& body) {
  std::filesystem::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out.flush()) throw PersistenceError("IoFailure", "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

std::optional<json> read_manifest(const RunLayout& layout, const std::string& stage) {
  const auto path = layout.manifest(stage);
  if (!std::filesystem::exists(path)) return std::nullopt;
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.value("complete", false)) return std::nullopt;
  return j;
}

json stats_json(const DifficultyStats& s) {
  json hist = json::object();
  for (const auto& [calls, freq] : s.histogram) hist[std::to_string(calls)] = freq;
  return {{"n", s.n}, {"mean_tool_calls", s.mean_turns ? json(*s.mean_turns) : json(nullptr)}, {"histogram", hist}};
}

json run_stage(const std::string& stage, const PipelineSettings& s, const ProviderSet& p, const RunLayout& layout,
               const CancelToken* cancel) {
  if (stage == "expand") {
    const SeedEntitySet r = run_stage1(p, s.expand, layout.noun_batches(), layout.seeds(), cancel);
    return {{"nouns", r.stats.nouns_generated},
            {"urls_visited", r.stats.urls_visited},
            {"entities_raw", r.stats.entities_raw},
            {"entities", r.entities.size()}};
  }
  if (stage == "explore") {
    const auto r = run_explore_stage(p, read_records<Entity>(layout.seeds()), s.explore, layout.graphs(), cancel);
    return {{"seeds", r.seeds}, {"graphs", r.graphs}, {"failed", r.failed}, {"truncated", r.truncated}};
  }
  if (stage == "genqa") {
    const auto r = run_stage2(p, read_records<EntityGraph>(layout.graphs()), s.genqa, layout.qa(), cancel);
    return {{"graphs", r.graphs}, {"accepted", r.accepted}, {"failed", r.failed}, {"rejected", r.rejected}};
  }
  if (stage == "collect") {
    const auto tok = make_tokenizer(s.tokenizer);
    const auto r = sample_trajectories(p, read_records<QAPair>(layout.qa()), s.collect, *tok, layout.trajectories(), cancel);
    return {{"tasks", r.tasks}, {"trajectories", r.trajectories}, {"by_status", r.by_status}};
  }
  if (stage == "filter") {
    const auto tok = make_tokenizer(s.tokenizer);
    const auto trajectories = read_records<Trajectory>(layout.trajectories());
    const auto r = run_filter_stage(p, trajectories, s.filter, *tok, layout.kept(), layout.verdicts(), cancel);
    return {{"input", trajectories.size()}, {"kept", r.kept.size()}, {"rejected", r.rejected_by_stage}};
  }
  const auto source = read_records<Trajectory>(s.pairs_from_kept ? layout.kept() : layout.trajectories());
  const auto r = run_pair_stage(p, source, s.score, layout.scores(), layout.pairs(), cancel);
  write_file(layout.difficulty_csv(), stats_to_csv(difficulty_stats(read_records<Trajectory>(layout.trajectories()))));
  return {{"source", s.pairs_from_kept ? "kept" : "collected"},
          {"trajectories", r.trajectories},
          {"scored", r.scored},
          {"tasks", r.tasks},
          {"pairs", r.pairs}};
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k = {
        "run.seed", "run.workers", "providers.mock", "retry.max_retries", "retry.base_ms", "retry.jitter",
        "llm.endpoint", "llm.model", "llm.policy_model", "llm.judge_model", "llm.summarizer_model",
        "llm.timeout_seconds", "search.endpoint", "search.top_k", "fetch.proxy", "wiki.endpoint",
        "sandbox.interpreter", "sandbox.require_isolation", "sandbox.wall_seconds", "sandbox.output_bytes",
        "mock.chat_fixtures", "mock.fallback", "stage1.batch_size", "stage1.workers", "stage1.target_pool_size",
        "stage1.top_k", "stage1.max_batches", "stage1.stoplist_path", "stage1.high_frequency_path",
        "stage2.depth_dist", "stage2.frontier_k", "stage2.max_agent_turns", "stage2.max_calls", "stage2.max_seeds",
        "stage2.workers", "stage2.prune", "stage2.validate", "collect.rollouts", "collect.max_turns",
        "collect.max_context_tokens", "collect.tool_timeout_seconds", "collect.temperature", "collect.workers",
        "filter.min_tokens", "filter.max_tokens", "filter.workers", "tokenizer.mode", "tokenizer.vocab_path",
        "dpo.source", "dpo.workers"};
    for (const char* p : kProviders) {
      k.push_back(std::string("pricing.") + p);
      k.push_back(std::string("limits.") + p + ".rate_per_second");
      k.push_back(std::string("limits.") + p + ".max_in_flight");
    }
    return k;
  }();
  return keys;
}

PipelineSettings PipelineSettings::from_config(const Config& c) {
  const std::set<std::string> known(known_config_keys().begin(), known_config_keys().end());
  std::vector<std::string> unknown;
  for (const auto& [k, v] : c.entries()) {
    if (!known.count(k)) unknown.push_back(k);
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("unknown config keys: " + list);
  }

  PipelineSettings s;
  s.seed = c.get_u64("run.seed", 7);
  const auto workers = static_cast<std::int64_t>(positive(c, "run.workers", 1));

  s.expand.batch_size = static_cast<int>(positive(c, "stage1.batch_size", 8));
  s.expand.workers = positive(c, "stage1.workers", workers);
  s.expand.target_pool_size = positive(c, "stage1.target_pool_size", 100);
  s.expand.top_k = static_cast<int>(positive(c, "stage1.top_k", c.get_int("search.top_k", 10)));
  s.expand.max_batches = static_cast<int>(positive(c, "stage1.max_batches", 50));
  if (c.has("stage1.stoplist_path")) s.expand.stoplist = load_word_list(c.get_string("stage1.stoplist_path"));
  if (c.has("stage1.high_frequency_path")) {
    s.expand.high_frequency = load_word_list(c.get_string("stage1.high_frequency_path"));
  }
  s.expand.seed = derive_seed(s.seed, "expand");

  try {
    s.explore.depth_dist = parse_depth_dist(c.get_string("stage2.depth_dist", "1:0.4,2:0.4,3:0.2"));
  } catch (const ExplorerError& e) {
    throw ConfigError(std::string("stage2.depth_dist: ") + e.what());
  }
  s.explore.options.frontier_k = non_negative(c, "stage2.frontier_k", 3);
  s.explore.options.budget.max_agent_turns = static_cast<int>(positive(c, "stage2.max_agent_turns", 8));
  s.explore.options.budget.max_calls = static_cast<int>(positive(c, "stage2.max_calls", 64));
  s.explore.options.high_frequency = s.expand.high_frequency;
  s.explore.options.seed = derive_seed(s.seed, "explore");
  s.explore.max_seeds = non_negative(c, "stage2.max_seeds", 0);
  s.explore.workers = positive(c, "stage2.workers", workers);

  s.genqa.workers = s.explore.workers;
  s.genqa.prune = c.get_bool("stage2.prune", true);
  s.genqa.validate = c.get_bool("stage2.validate", true);
  s.genqa.seed = derive_seed(s.seed, "genqa");

  s.collect.rollouts = static_cast<int>(positive(c, "collect.rollouts", 4));
  s.collect.workers = positive(c, "collect.workers", workers);
  s.collect.limits.max_turns = static_cast<int>(positive(c, "collect.max_turns", 50));
  s.collect.limits.max_context_tokens = positive(c, "collect.max_context_tokens", 131072);
  s.collect.limits.per_tool_timeout_seconds = c.get_double("collect.tool_timeout_seconds", 10.0);
  if (!(s.collect.limits.per_tool_timeout_seconds > 0)) throw ConfigError("collect.tool_timeout_seconds must be > 0");
  s.collect.temperature = c.get_double("collect.temperature", 0.7);
  if (!(s.collect.temperature >= 0)) throw ConfigError("collect.temperature must be >= 0");
  s.collect.seed = derive_seed(s.seed, "collect");

  s.filter.min_tokens = non_negative(c, "filter.min_tokens", static_cast<std::int64_t>(kMinTrajectoryTokens));
  s.filter.max_tokens = positive(c, "filter.max_tokens", static_cast<std::int64_t>(kMaxTrajectoryTokens));
  if (s.filter.min_tokens > s.filter.max_tokens) throw ConfigError("filter.min_tokens exceeds filter.max_tokens");
  s.filter.workers = positive(c, "filter.workers", workers);
  s.filter.seed = derive_seed(s.seed, "filter");

  const std::string mode = c.get_string("tokenizer.mode", "approximate");
  if (mode == "vocab") {
    s.tokenizer = {TokenizerMode::VocabFile, c.get_string("tokenizer.vocab_path")};
  } else if (mode != "approximate") {
    throw ConfigError("tokenizer.mode must be approximate or vocab, got '" + mode + "'");
  }

  const std::string source = c.get_string("dpo.source", "collected");
  if (source != "collected" && source != "kept") throw ConfigError("dpo.source must be collected or kept");
  s.pairs_from_kept = source == "kept";
  s.score.workers = positive(c, "dpo.workers", workers);
  s.score.seed = derive_seed(s.seed, "score");
  return s;
}

json build_report(const RunLayout& layout) {
  json report = {{"stages", json::object()}, {"artifacts", json::object()}};
  std::vector<std::string> complete;
  for (const auto& stage : kStageNames) {
    if (auto m = read_manifest(layout, stage)) {
      complete.push_back(stage);
      report["stages"][stage] = (*m)["counts"];
    } else {
      report["stages"][stage] = nullptr;
    }
  }
  report["complete"] = complete;
  for (const auto& path : {layout.seeds(), layout.graphs(), layout.qa(), layout.trajectories(), layout.verdicts(),
                           layout.kept(), layout.scores(), layout.pairs()}) {
    report["artifacts"][path.filename().string()] = count_records(path);
  }
  if (std::filesystem::exists(layout.trajectories())) {
    report["difficulty"] = stats_json(difficulty_stats(read_records<Trajectory>(layout.trajectories())));
  }
  if (std::filesystem::exists(layout.verdicts())) {
    json v = {{"kept", 0}, {"rejected", json::object()}};
    for (const auto& verdict : read_records<FilterVerdict>(layout.verdicts())) {
      if (verdict.passed) {
        v["kept"] = v["kept"].get<int>() + 1;
      } else {
        const std::string stage = to_string(*verdict.failed_stage);
        v["rejected"][stage] = v["rejected"].value(stage, 0) + 1;
      }
    }
    report["verdicts"] = v;
  }
  const auto tasks = static_cast<std::int64_t>(count_records(layout.qa()));
  const CostEstimate est = estimate_api_cost(tasks);
  report["estimate"] = {{"tasks", tasks},
                        {"calls_per_task", kDefaultCallsPerTask},
                        {"n_calls", est.n_calls},
                        {"micro_usd", est.micro_usd},
                        {"usd", format_usd(est.micro_usd)}};
  return report;
}

json usage_with_cost(json usage, const ProviderSet& p) {
  std::map<std::string, std::uint64_t> total;
  for (const auto& [stage, calls] : usage["stages"].items()) {
    for (const auto& [provider, n] : calls.items()) total[provider] += n.get<std::uint64_t>();
  }
  std::int64_t micro = 0;
  json total_json = json::object();
  for (const auto& [provider, n] : total) {
    total_json[provider] = n;
    micro += estimate_calls_cost(static_cast<std::int64_t>(n), p.ledger->unit_price(provider)).micro_usd;
  }
  usage["total"] = total_json;
  usage["cost"] = {{"micro_usd", micro}, {"usd", format_usd(micro)}};
  return usage;
}

RunOutcome run_pipeline(const Config& config, const std::filesystem::path& run_dir,
                        const std::optional<std::string>& stop_after, const CancelToken* cancel, Sleeper sleeper) {
  if (stop_after && std::find(kStageNames.begin(), kStageNames.end(), *stop_after) == kStageNames.end()) {
    throw ConfigError("unknown stage '" + *stop_after + "'");
  }
  const PipelineSettings settings = PipelineSettings::from_config(config);
  const ProviderSet providers = make_providers(config, std::move(sleeper));
  const RunLayout layout{run_dir};
  std::filesystem::create_directories(run_dir);

  const std::string snapshot = snapshot_text(config);
  if (std::filesystem::exists(layout.config_snapshot())) {
    if (read_file(layout.config_snapshot()) != snapshot) {
      throw ConfigError(run_dir.string() + " was started with a different configuration; use a fresh directory");
    }
  } else {
    write_file(layout.config_snapshot(), snapshot);
  }

  RunOutcome outcome;
  outcome.already_complete = true;
  for (const auto& stage : kStageNames) outcome.already_complete = outcome.already_complete && read_manifest(layout, stage);

  for (const auto& stage : kStageNames) {
    if (!read_manifest(layout, stage)) {
      spdlog::info("stage {}: running", stage);
      const auto before = providers.ledger->counts();
      const auto record_usage = [&] {
        json usage = std::filesystem::exists(layout.usage()) ? json::parse(read_file(layout.usage()))
                                                             : json{{"stages", json::object()}};
        json& entry = usage["stages"][stage];
        if (!entry.is_object()) entry = json::object();
        for (const auto& [provider, n] : providers.ledger->counts()) {
          const auto it = before.find(provider);
          const std::uint64_t d = n - (it == before.end() ? 0 : it->second);
          if (d > 0) entry[provider] = entry.value(provider, std::uint64_t{0}) + d;
        }
        write_file(layout.usage(), usage_with_cost(std::move(usage), providers).dump(2) + "\n");
      };
      json counts;
      try {
        counts = run_stage(stage, settings, providers, layout, cancel);
      } catch (const ConfigError&) {
        record_usage();
        throw;
      } catch (const ProviderError& e) {
        record_usage();
        if (e.kind() == "ProviderUnavailable") throw;
        throw StageFailure(stage, e.kind() == "Cancelled" ? std::string("interrupted") : std::string(e.what()));
      } catch (const StageFailure&) {
        record_usage();
        throw;
      } catch (const Error& e) {
        record_usage();
        throw StageFailure(stage, e.what());
      } catch (const std::exception& e) {
        record_usage();
        throw StageFailure(stage, e.what());
      }
      record_usage();
      write_file(layout.manifest(stage), json{{"stage", stage}, {"complete", true}, {"counts", counts}}.dump(2) + "\n");
      outcome.ran.push_back(stage);
      spdlog::info("stage {}: done {}", stage, counts.dump());
    }
    if (stop_after && *stop_after == stage) break;
  }
  outcome.report = build_report(layout);
  write_file(layout.report(), outcome.report.dump(2) + "\n");
  return outcome;
}

}  // namespace deepforge

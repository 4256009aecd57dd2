// SPDX-License-Identifier: Apache-2.0
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "deepforge/analytics/analytics.hpp"
#include "deepforge/app/pipeline.hpp"
#include "deepforge/curation/loss.hpp"
#include "deepforge/datamodel/jsonl.hpp"
#include "deepforge/datamodel/serialize.hpp"

using namespace deepforge;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;
constexpr int kExitOutage = 4;

CancelToken g_cancel;

extern "C" void on_signal(int) { g_cancel.cancel(); }

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool mock = false;
  std::optional<int> workers;
  std::string log_level = "info";
};

Config load_config(const Globals& g) {
  Config c = g.config_path.empty() ? Config() : Config::load(g.config_path);
  if (g.seed) c.set("run.seed", std::to_string(*g.seed));
  if (g.mock) c.set("providers.mock", "true");
  if (g.workers) c.set("run.workers", std::to_string(*g.workers));
  return c;
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

int run_guarded(const std::string& stage, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const StageFailure& e) {
    spdlog::error("{}", e.what());
    return kExitStage;
  } catch (const ProviderError& e) {
    spdlog::error("{}: {}", stage, e.what());
    return e.kind() == "ProviderUnavailable" ? kExitOutage : kExitStage;
  } catch (const Error& e) {
    if (e.kind() == "InvalidDistribution") {
      spdlog::error("{}", e.what());
      return kExitConfig;
    }
    spdlog::error("StageFailure({}): {}", stage, e.what());
    return kExitStage;
  } catch (const std::exception& e) {
    spdlog::error("StageFailure({}): {}", stage, e.what());
    return kExitStage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deepforge: synthetic deep-research data pipeline"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Flat key = value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Run seed (run.seed)");
  app.add_flag("--mock", g.mock, "Force offline mock providers");
  app.add_option("--workers", g.workers, "Worker threads per stage (run.workers)")->check(CLI::PositiveNumber);
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off");

  std::string out, in, aux, depth_dist, dir = "run", stop_after, loss_mask = "exclude-tool", csv;
  bool skip_prune = false, skip_validate = false;
  std::optional<int> rollouts, max_turns;
  std::optional<std::int64_t> max_context, tasks, calls;
  double calls_per_task = kDefaultCallsPerTask, price = kDefaultUsdPer1000Calls;

  auto* expand = app.add_subcommand("expand", "Grow the seed entity pool");
  expand->add_option("--out", out, "Entities JSONL")->required();

  auto* explore = app.add_subcommand("explore", "Build an entity graph per seed");
  explore->add_option("--entities", in, "Entities JSONL")->required()->check(CLI::ExistingFile);
  explore->add_option("--out", out, "Graphs JSONL")->required();
  explore->add_option("--depth-dist", depth_dist, "Depth distribution, e.g. \"2:0.3,3:0.5,4:0.2\"");

  auto* genqa = app.add_subcommand("genqa", "Generate, prune and validate QA pairs");
  genqa->add_option("--graphs", in, "Graphs JSONL")->required()->check(CLI::ExistingFile);
  genqa->add_option("--out", out, "QA JSONL")->required();
  genqa->add_flag("--skip-prune", skip_prune, "Keep generated questions as they are");
  genqa->add_flag("--skip-validate", skip_validate, "Accept every generated pair");

  auto* collect = app.add_subcommand("collect", "Sample agent trajectories per QA pair");
  collect->add_option("--qa", in, "QA JSONL")->required()->check(CLI::ExistingFile);
  collect->add_option("--out", out, "Trajectories JSONL")->required();
  collect->add_option("--rollouts", rollouts, "Rollouts per task")->check(CLI::PositiveNumber);
  collect->add_option("--max-turns", max_turns, "Assistant turns per rollout")->check(CLI::PositiveNumber);
  collect->add_option("--max-context", max_context, "Context budget in tokens")->check(CLI::PositiveNumber);

  auto* filter = app.add_subcommand("filter", "Five-stage trajectory filter");
  filter->add_option("--in", in, "Trajectories JSONL")->required()->check(CLI::ExistingFile);
  filter->add_option("--out", out, "Kept trajectories JSONL")->required();
  filter->add_option("--verdicts", aux, "Verdicts JSONL")->required();

  auto* pairs = app.add_subcommand("dpo-pairs", "Score trajectories and build preference pairs");
  pairs->add_option("--in", in, "Trajectories JSONL")->required()->check(CLI::ExistingFile);
  pairs->add_option("--scores", aux, "Score cards JSONL")->required();
  pairs->add_option("--out", out, "Preference pairs JSONL")->required();

  auto* stats = app.add_subcommand("stats", "Tool-call difficulty statistics");
  stats->add_option("--in", in, "Trajectories JSONL")->required()->check(CLI::ExistingFile);
  stats->add_option("--csv", csv, "Write the distribution as CSV");

  auto* cost = app.add_subcommand("cost-estimate", "API cost of a data-generation run");
  auto* tasks_opt = cost->add_option("--tasks", tasks, "Number of tasks")->check(CLI::NonNegativeNumber);
  cost->add_option("--calls", calls, "Number of calls")->check(CLI::NonNegativeNumber)->excludes(tasks_opt);
  cost->add_option("--calls-per-task", calls_per_task, "Calls per task")->check(CLI::NonNegativeNumber);
  cost->add_option("--price", price, "USD per 1000 calls")->check(CLI::NonNegativeNumber);

  auto* run = app.add_subcommand("run", "Run every stage, resuming a partial run directory");
  run->add_option("--dir", dir, "Run directory");
  run->add_option("--stop-after", stop_after, "Stop after this stage")
      ->check(CLI::IsMember({"expand", "explore", "genqa", "collect", "filter", "dpo-pairs"}));

  auto* losscheck = app.add_subcommand("losscheck", "Numeric self-test of the loss kernels");
  losscheck->add_option("--trajectories", in, "Also report loss-mask coverage for these trajectories");
  losscheck->add_option("--loss-mask", loss_mask, "exclude-tool or all")->check(CLI::IsMember({"exclude-tool", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  auto logger = spdlog::stderr_color_mt("deepforge");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(g.log_level));
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  const std::string name = app.get_subcommands().front()->get_name();
  return run_guarded(name, [&] {
    Config config = load_config(g);
    if (name == "cost-estimate") {
      const CostEstimate e = calls ? estimate_calls_cost(*calls, price) : estimate_api_cost(tasks.value_or(0), calls_per_task, price);
      print_json({{"n_calls", e.n_calls}, {"micro_usd", e.micro_usd}, {"usd", format_usd(e.micro_usd)}});
      return;
    }
    if (name == "stats") {
      const DifficultyStats s = difficulty_stats(read_records<Trajectory>(in));
      if (!csv.empty()) {
        std::ofstream f(csv, std::ios::binary | std::ios::trunc);
        f << stats_to_csv(s);
      }
      json hist = json::object();
      for (const auto& [k, v] : s.histogram) hist[std::to_string(k)] = v;
      print_json({{"n", s.n}, {"mean_tool_calls", s.mean_turns ? json(*s.mean_turns) : json(nullptr)}, {"histogram", hist}});
      if (!s.mean_turns) spdlog::warn("EmptyInput: no trajectories, mean undefined");
      return;
    }
    if (name == "losscheck") {
      bool ok = true;
      for (const auto& c : run_loss_checks()) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
        ok = ok && c.passed;
      }
      if (!in.empty()) {
        const ApproximateTokenizer tok;
        const LossMask mode = loss_mask == "all" ? LossMask::All : LossMask::ExcludeToolResponses;
        for (const auto& t : read_records<Trajectory>(in)) {
          const auto mask = trajectory_loss_mask(t, tok, mode);
          const auto in_loss = std::count(mask.begin(), mask.end(), true);
          std::cout << t.id << ": " << in_loss << " of " << mask.size() << " tokens in the loss\n";
        }
      }
      if (!ok) throw StageFailure("losscheck", "a loss check failed");
      return;
    }
    if (name == "run") {
      const auto outcome = run_pipeline(config, dir, stop_after.empty() ? std::nullopt : std::optional(stop_after), &g_cancel);
      if (outcome.already_complete) std::cout << "all stages complete\n";
      print_json(outcome.report);
      return;
    }

    if (!depth_dist.empty()) config.set("stage2.depth_dist", depth_dist);
    if (rollouts) config.set("collect.rollouts", std::to_string(*rollouts));
    if (max_turns) config.set("collect.max_turns", std::to_string(*max_turns));
    if (max_context) config.set("collect.max_context_tokens", std::to_string(*max_context));
    if (skip_prune) config.set("stage2.prune", "false");
    if (skip_validate) config.set("stage2.validate", "false");
    const PipelineSettings s = PipelineSettings::from_config(config);
    const ProviderSet p = make_providers(config);
    const CancelToken* cancel = &g_cancel;
    json result;
    if (name == "expand") {
      auto batches = std::filesystem::path(out);
      batches += ".batches";
      const auto r = run_stage1(p, s.expand, batches, out, cancel);
      result = {{"entities", r.entities.size()}, {"nouns", r.stats.nouns_generated}, {"urls_visited", r.stats.urls_visited}};
    } else if (name == "explore") {
      const auto r = run_explore_stage(p, read_records<Entity>(in), s.explore, out, cancel);
      result = {{"seeds", r.seeds}, {"graphs", r.graphs}, {"failed", r.failed}, {"truncated", r.truncated}};
    } else if (name == "genqa") {
      const auto r = run_stage2(p, read_records<EntityGraph>(in), s.genqa, out, cancel);
      result = {{"graphs", r.graphs}, {"accepted", r.accepted}, {"failed", r.failed}, {"rejected", r.rejected}};
    } else if (name == "collect") {
      const auto tok = make_tokenizer(s.tokenizer);
      const auto r = sample_trajectories(p, read_records<QAPair>(in), s.collect, *tok, out, cancel);
      result = {{"tasks", r.tasks}, {"trajectories", r.trajectories}, {"by_status", r.by_status}};
    } else if (name == "filter") {
      const auto tok = make_tokenizer(s.tokenizer);
      const auto r = run_filter_stage(p, read_records<Trajectory>(in), s.filter, *tok, out, aux, cancel);
      result = {{"verdicts", r.verdicts.size()}, {"kept", r.kept.size()}, {"rejected", r.rejected_by_stage}};
    } else {
      const auto r = run_pair_stage(p, read_records<Trajectory>(in), s.score, aux, out, cancel);
      result = {{"scored", r.scored}, {"tasks", r.tasks}, {"pairs", r.pairs}};
    }
    result["calls"] = p.ledger->to_json();
    print_json(result);
  });
}

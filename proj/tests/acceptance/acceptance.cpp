// SPDX-License-Identifier: Apache-2.0
// One PASS/FAIL line per acceptance criterion. Criteria 1, 2, 8 and 9 drive
// the deepforge binary; the rest call the library against independent
// references.
#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "deepforge/analytics/analytics.hpp"
#include "deepforge/app/pipeline.hpp"
#include "deepforge/common/hash.hpp"
#include "deepforge/common/rng.hpp"
#include "deepforge/curation/filters.hpp"
#include "deepforge/curation/loss.hpp"
#include "deepforge/curation/preference.hpp"
#include "deepforge/datamodel/jsonl.hpp"
#include "deepforge/datamodel/serialize.hpp"
#include "deepforge/datamodel/transcript.hpp"
#include "deepforge/explorer/explorer.hpp"
#include "message_gen.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace deepforge;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Collects failed sub-checks; the first few are reported.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    pass_ = false;
    if (failures_.size() < 4) failures_.push_back(what);
  }
  Outcome outcome(const std::string& summary) const {
    if (pass_) return {true, summary};
    std::string d;
    for (const auto& f : failures_) d += (d.empty() ? "" : "; ") + f;
    return {false, d};
  }

 private:
  bool pass_ = true;
  std::vector<std::string> failures_;
};

const std::vector<std::string> kMockRun = {"--mock", "--seed", "7", "--log-level", "warn"};

std::vector<std::string> run_args(const fs::path& dir) {
  std::vector<std::string> a = kMockRun;
  a.insert(a.end(), {"run", "--dir", dir.string()});
  return a;
}

pid_t spawn(const std::vector<std::string>& args, bool quiet) {
  const pid_t pid = fork();
  if (pid == 0) {
    if (quiet) {
      const int devnull = open("/dev/null", O_WRONLY);
      dup2(devnull, STDOUT_FILENO);
      dup2(devnull, STDERR_FILENO);
    }
    std::vector<char*> argv;
    std::string exe = DEEPFORGE_CLI;
    argv.push_back(exe.data());
    std::vector<std::string> copy = args;
    for (auto& a : copy) argv.push_back(a.data());
    argv.push_back(nullptr);
    execv(exe.c_str(), argv.data());
    _exit(127);
  }
  return pid;
}

int wait_exit(pid_t pid) {
  int status = 0;
  waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
}

int run_cli(const std::vector<std::string>& args) { return wait_exit(spawn(args, true)); }

std::string capture_cli(const std::vector<std::string>& args) {
  std::string cmd = std::string("'") + DEEPFORGE_CLI + "'";
  for (const auto& a : args) cmd += " '" + a + "'";
  std::string out;
  if (FILE* f = popen(cmd.c_str(), "r")) {
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
    pclose(f);
  }
  return out;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Every file of a run directory except the call-usage log, by relative path.
std::map<std::string, std::string> artifacts(const fs::path& dir) {
  std::map<std::string, std::string> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "usage.json") continue;
    out[fs::relative(e.path(), dir).string()] = read_all(e.path());
  }
  return out;
}

std::string first_difference(const std::map<std::string, std::string>& a, const std::map<std::string, std::string>& b) {
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    if (it == b.end()) return k + " missing";
    if (it->second != v) return k + " differs";
  }
  for (const auto& [k, v] : b) {
    if (!a.count(k)) return k + " unexpected";
  }
  return "";
}

fs::path scratch_root() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() / ("deepforge-acceptance-" + std::to_string(getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome criterion_1() {
  Checks c;
  const fs::path a = scratch_root() / "c1a", b = scratch_root() / "c1b";
  const auto t0 = std::chrono::steady_clock::now();
  const int rc_a = run_cli(run_args(a));
  const double secs_a = seconds_since(t0);
  const auto t1 = std::chrono::steady_clock::now();
  const int rc_b = run_cli(run_args(b));
  const double secs_b = seconds_since(t1);
  c.expect(rc_a == 0 && rc_b == 0, "exit codes " + std::to_string(rc_a) + ", " + std::to_string(rc_b));
  c.expect(secs_a < 120 && secs_b < 120, "took " + std::to_string(secs_a) + " s");
  const RunLayout layout{a};
  for (const auto& stage : kStageNames) c.expect(fs::exists(layout.manifest(stage)), stage + " not complete");
  const std::size_t qa = count_records(layout.qa());
  const std::size_t pairs = count_records(layout.pairs());
  c.expect(qa >= 10, std::to_string(qa) + " QA pairs");
  c.expect(pairs >= 4, std::to_string(pairs) + " preference pairs");
  const std::string diff = first_difference(artifacts(a), artifacts(b));
  c.expect(diff.empty(), "runs not byte-identical: " + diff);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu QA pairs, %zu preference pairs, identical reruns, %.1f s and %.1f s", qa, pairs,
                secs_a, secs_b);
  return c.outcome(buf);
}

Outcome criterion_2() {
  Checks c;
  const json calls = json::parse(capture_cli({"cost-estimate", "--calls", "1000"}), nullptr, false);
  const json tasks = json::parse(capture_cli({"cost-estimate", "--tasks", "10000", "--calls-per-task", "15"}), nullptr, false);
  c.expect(!calls.is_discarded() && calls.value("usd", "") == "$1.00", "1000 calls: " + calls.dump());
  c.expect(!tasks.is_discarded() && tasks.value("usd", "") == "$150.00" && tasks.value("n_calls", 0) == 150000,
           "10000 tasks: " + tasks.dump());
  Rng rng(derive_seed(7, "cost-splits"));
  int splits = 0;
  for (int i = 0; i < 100; ++i) {
    const auto total = static_cast<std::int64_t>(rng.below(10'000'000));
    const auto left = static_cast<std::int64_t>(rng.below(static_cast<std::size_t>(total) + 1));
    const auto whole = estimate_calls_cost(total).micro_usd;
    const auto parts = estimate_calls_cost(left).micro_usd + estimate_calls_cost(total - left).micro_usd;
    // Reference: $1 per 1000 calls is exactly 1000 micro-USD per call.
    c.expect(whole == parts && whole == total * 1000, "split " + std::to_string(left) + "/" + std::to_string(total));
    ++splits;
  }
  return c.outcome("$1.00 for 1000 calls, $150.00 for 10000 x 15, linear over " + std::to_string(splits) + " splits");
}

Outcome criterion_3() {
  Checks c;
  const double zero = dpo_loss({-3.25, -1.5}, {-7.0, -5.25}, 0.8).loss;
  c.expect(std::abs(zero - std::numbers::ln2) <= 1e-9, "zero margin loss " + std::to_string(zero));
  const double ln3 = dpo_loss({std::log(3.0), 0.0}, {0.0, 0.0}, 1.0).loss;
  c.expect(std::abs(ln3 + std::log(0.75)) <= 1e-9, "margin ln3 loss " + std::to_string(ln3));
  Rng rng(derive_seed(7, "fd-points"));
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const long double m = -10.0L + 20.0L * rng.uniform();
    const long double beta = 0.1L + 1.9L * rng.uniform();
    const long double h = 1e-5L;
    auto naive = [&](long double x) { return std::log1p(std::exp(-beta * x)); };
    const long double fd = (naive(m + h) - naive(m - h)) / (2 * h);
    const long double g = dpo_loss_grad(static_cast<double>(m), static_cast<double>(beta));
    worst = std::max(worst, static_cast<double>(std::abs(fd - g) / std::max(std::abs(fd), 1e-300L)));
  }
  c.expect(worst <= 1e-6, "finite-difference relative error " + std::to_string(worst));
  for (double m : {1e4, -1e4}) {
    const double l = dpo_loss({m, 0.0}, {0.0, 0.0}, 1.0).loss;
    c.expect(std::isfinite(l) && std::isfinite(dpo_loss_grad(m, 1.0)), "overflow at margin " + std::to_string(m));
  }
  for (const auto& chk : run_loss_checks()) c.expect(chk.passed, chk.name + ": " + chk.detail);
  char buf[160];
  std::snprintf(buf, sizeof buf, "ln2 and -ln(3/4) within 1e-9, 20-point relative gradient error %.2e, finite at +/-1e4", worst);
  return c.outcome(buf);
}

Outcome criterion_4() {
  Checks c;
  const ProviderSet p = dftest::mock_providers();
  const ApproximateTokenizer tok;
  int rejected = 0, kept = 0;
  for (const auto& row : read_json_lines(dftest::fixture_path("filter_golden.jsonl"))) {
    const std::string expect = row.at("expect").get<std::string>();
    const Trajectory t = row.at("trajectory").get<Trajectory>();
    const FilterVerdict v = filter_trajectory(p, t, FilterConfig{}, tok);
    if (expect == "kept") {
      c.expect(v.passed, t.id + " rejected: " + v.details);
      kept += v.passed;
    } else {
      const bool ok = !v.passed && v.failed_stage && to_string(*v.failed_stage) == expect;
      c.expect(ok, t.id + " expected " + expect + ", got " + (v.failed_stage ? to_string(*v.failed_stage) : "kept"));
      rejected += ok;
    }
  }
  c.expect(rejected == 10 && kept == 5, std::to_string(rejected) + " rejected, " + std::to_string(kept) + " kept");

  Trajectory base;
  base.task_id = "t-bounds";
  base.query = "Which city is the capital of France?";
  base.gold_answer = "Paris";
  base.final_answer = "Paris";
  base.status = TrajectoryStatus::Complete;
  base.messages = {Message::assistant({Segment::think("Paris."), Segment::answer("Paris")})};
  for (const auto& [n, want] : std::vector<std::pair<std::size_t, bool>>{
           {8191, false}, {8192, true}, {131072, true}, {131073, false}}) {
    Trajectory t = base;
    std::string& think = t.messages[0].segments[0].text;
    for (std::size_t have = tok.count(render_trajectory(t)); have < n; ++have) think += " x";
    const std::size_t count = tok.count(render_trajectory(t));
    c.expect(count == n, "padding reached " + std::to_string(count) + " not " + std::to_string(n));
    c.expect(filter_token_length(t, tok).pass == want, std::to_string(n) + " tokens misjudged");
  }
  return c.outcome("10 rejected at their intended stage, 5 kept, 8191/8192/131072/131073 tokens -> out/in/in/out");
}

Outcome criterion_5() {
  Checks c;
  Rng rng(derive_seed(7, "multisets"));
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 4 + rng.below(5);
    std::vector<ScoreCard> cards;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = static_cast<double>(rng.below(7));
      cards.push_back(ScoreCard::make("tr-" + std::to_string(rng.below(100)) + "-" + std::to_string(i), "task", {s, s, s}));
    }
    // Brute force: place every card by counting the cards ordered before it.
    std::vector<std::size_t> rank(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i && (cards[j].aggregate > cards[i].aggregate ||
                       (cards[j].aggregate == cards[i].aggregate && cards[j].trajectory_id < cards[i].trajectory_id))) {
          ++rank[i];
        }
      }
    }
    std::vector<PreferencePair> expected;
    for (std::size_t top = 0; top < 2; ++top) {
      for (std::size_t bottom = n - 2; bottom < n; ++bottom) {
        std::size_t ci = 0, ri = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (rank[i] == top) ci = i;
          if (rank[i] == bottom) ri = i;
        }
        if (cards[ci].aggregate > cards[ri].aggregate) {
          expected.push_back({"task", cards[ci].trajectory_id, cards[ri].trajectory_id, cards[ci].aggregate,
                              cards[ri].aggregate});
        }
      }
    }
    const auto pairs = build_preference_pairs(cards);
    c.expect(pairs == expected, "trial " + std::to_string(trial));
    c.expect(pairs.size() <= 4, "trial " + std::to_string(trial) + " emitted " + std::to_string(pairs.size()) + " pairs");
    for (const auto& pair : pairs) {
      c.expect(pair.chosen_score > pair.rejected_score, "trial " + std::to_string(trial) + " kept a tie");
    }
  }
  return c.outcome("500 random multisets match the brute-force top2 x bottom2 strict pairs, at most 4 each, no ties");
}

Outcome criterion_6() {
  Checks c;
  Rng rng(derive_seed(7, "round-trip"));
  int checked = 0;
  while (checked < 10000) {
    const auto m = dftest::random_message(rng);
    if (!m) continue;
    const std::string text = render_message(*m);
    Message back;
    try {
      back = parse_assistant_message(text);
    } catch (const Error& e) {
      c.expect(false, std::string("parse failed: ") + e.what());
      break;
    }
    if (m->role == Role::Tool) back.role = Role::Tool;
    c.expect(segment_equivalent(*m, back), "round trip differs for " + text.substr(0, 60));
    ++checked;
  }
  const json fx = json::parse(read_all(dftest::fixture_path("gaia_honey.json")));
  const Trajectory t = parse_transcript(fx.at("query").get<std::string>(), fx.at("transcript").get<std::string>());
  int assistant = 0, tool = 0;
  for (const auto& m : t.messages) {
    assistant += m.role == Role::Assistant;
    tool += m.role == Role::Tool;
  }
  c.expect(assistant == 5 && tool == 4, std::to_string(assistant) + " assistant, " + std::to_string(tool) + " tool");
  c.expect(t.tool_call_count == 4, "tool_call_count " + std::to_string(t.tool_call_count));
  c.expect(t.final_answer.has_value(), "no final answer");
  c.expect(validate_trajectory(t).ok(), "fixture trajectory invalid");
  return c.outcome(std::to_string(checked) + " messages round-trip; fixture has 5 assistant turns, 4 tool responses, "
                   "an answer and tool_call_count=4");
}

Outcome criterion_7() {
  Checks c;
  const DepthDistribution uniform = parse_depth_dist("2:1,3:1,4:1");
  std::map<int, int> counts;
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) ++counts[sample_depth(uniform, derive_seed(7, "depth:" + std::to_string(i)))];
  double chi2 = 0;
  for (int d : {2, 3, 4}) {
    const double e = kDraws / 3.0;
    chi2 += (counts[d] - e) * (counts[d] - e) / e;
  }
  c.expect(counts.size() == 3, "draws outside {2,3,4}");
  c.expect(chi2 < 9.2103, "chi-square " + std::to_string(chi2));
  const DepthDistribution point{{{3, 1.0}}};
  bool atom = true;
  for (int i = 0; i < 1000; ++i) atom = atom && sample_depth(point, derive_seed(11, "point:" + std::to_string(i))) == 3;
  c.expect(atom, "point mass left its atom");
  char buf[120];
  std::snprintf(buf, sizeof buf, "chi-square %.3f < 9.2103 over %d draws; point mass always 3", chi2, kDraws);
  return c.outcome(buf);
}

Outcome criterion_8() {
  Checks c;
  const fs::path ref = scratch_root() / "c8ref";
  c.expect(run_cli(run_args(ref)) == 0, "reference run failed");
  const auto expected = artifacts(ref);
  int resumed = 0, interrupted = 0;
  for (const auto& stage : kStageNames) {
    const fs::path dir = scratch_root() / ("c8-" + stage);
    const fs::path manifest = RunLayout{dir}.manifest(stage);
    const pid_t pid = spawn(run_args(dir), true);
    bool killed = false;
    for (int i = 0; i < 120000; ++i) {
      if (fs::exists(manifest)) {
        kill(pid, SIGKILL);
        killed = true;
        break;
      }
      int status = 0;
      if (waitpid(pid, &status, WNOHANG) == pid) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    if (killed) interrupted += wait_exit(pid) == 128 + SIGKILL;
    c.expect(killed || fs::exists(manifest), stage + ": boundary never reached");
    c.expect(run_cli(run_args(dir)) == 0, stage + ": resume failed");
    const std::string diff = first_difference(expected, artifacts(dir));
    c.expect(diff.empty(), "killed after " + stage + ": " + diff);
    resumed += diff.empty();
  }
  return c.outcome("SIGKILL after each of " + std::to_string(resumed) + " stage boundaries (" +
                   std::to_string(interrupted) + " before exit), resumed artifacts identical");
}

Outcome criterion_9() {
  Checks c;
  const fs::path fixture = dftest::fixture_path("difficulty_50.jsonl");
  const fs::path csv = scratch_root() / "difficulty.csv";
  const json out = json::parse(capture_cli({"--log-level", "warn", "stats", "--in", fixture.string(), "--csv", csv.string()}),
                               nullptr, false);
  c.expect(!out.is_discarded(), "stats output is not JSON");
  // Reference computed from the fixture's message structure.
  const std::map<int, std::size_t> hist = {{0, 1}, {1, 4}, {2, 6}, {3, 7}, {4, 8}, {5, 5},
                                           {6, 4}, {7, 2}, {8, 2}, {9, 7}, {11, 2}, {14, 2}};
  if (!out.is_discarded()) {
    c.expect(out.value("n", 0) == 50, "n " + out.value("n", json()).dump());
    c.expect(out.contains("mean_tool_calls") && out["mean_tool_calls"].get<double>() == 261.0 / 50.0,
             "mean " + out.value("mean_tool_calls", json()).dump());
    json want = json::object();
    for (const auto& [k, v] : hist) want[std::to_string(k)] = v;
    c.expect(out.value("histogram", json()) == want, "histogram " + out.value("histogram", json()).dump());
  }
  const std::string text = read_all(csv);
  try {
    const DifficultyStats back = stats_from_csv(text);
    c.expect(back.histogram == hist && back.n == 50 && back.mean_turns == 261.0 / 50.0, "CSV reload differs");
    c.expect(stats_to_csv(back) == text, "CSV not reproduced byte for byte");
  } catch (const Error& e) {
    c.expect(false, std::string("CSV reload failed: ") + e.what());
  }
  return c.outcome("50 trajectories: mean 5.22, 12-bin histogram exact, CSV reloads identically");
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<std::function<Outcome()>> criteria = {criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                                                          criterion_6, criterion_7, criterion_8, criterion_9};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": " << o.detail << std::endl;
    failed += !o.pass;
  }
  std::error_code ec;
  fs::remove_all(scratch_root(), ec);
  return failed == 0 ? 0 : 1;
}

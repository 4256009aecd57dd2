// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <json.hpp>

#include "deepforge/common/text.hpp"
#include "deepforge/datamodel/jsonl.hpp"
#include "deepforge/datamodel/serialize.hpp"
#include "deepforge/expansion/expansion.hpp"
#include "deepforge/explorer/explorer.hpp"
#include "deepforge/qa/qa.hpp"
#include "test_support.hpp"

using namespace deepforge;
using nlohmann::json;

namespace {

EntityGraph nginx_graph() {
  EntityGraph g;
  g.root = "Nginx";
  EntityRecord root;
  root.entity.name = "Nginx";
  root.entity_self = {"nginx was publicly released in 2004"};
  root.entity_relations = {{"Igor Sysoev", "created by"}};
  EntityRecord igor;
  igor.entity.name = "Igor Sysoev";
  igor.entity_self = {"a software engineer"};
  g.records = {{"Nginx", root}, {"Igor Sysoev", igor}};
  g.depth = 1;
  g.id = compute_graph_id(g);
  return g;
}

QAPair pair(std::string question, std::string answer) {
  QAPair qa;
  qa.id = "t-1";
  qa.question = std::move(question);
  qa.answer = std::move(answer);
  return qa;
}

const std::string kQuestion =
    "Which web server first released publicly in 2004 was written by a developer who later founded a company?";

}  // namespace

TEST(ExtractBlock, FirstSpanTrimmed) {
  EXPECT_EQ(extract_block("x <answer> Nginx </answer> <answer>b</answer>", "answer"), std::optional<std::string>("Nginx"));
  EXPECT_FALSE(extract_block("<answer>open", "answer").has_value());
  EXPECT_FALSE(extract_block("nothing", "answer").has_value());
}

TEST(GraphPrompt, OneObjectPerRecord) {
  const std::string s = serialize_graph_for_prompt(nginx_graph());
  EXPECT_TRUE(text::contains(s, "nginx was publicly released in 2004"));
  EXPECT_TRUE(text::contains(s, "\"entity\": \"Igor Sysoev\""));
}

TEST(GenerateQa, ScriptedReplyAndProvenance) {
  auto scripted = std::make_shared<ScriptedChatBackend>(
      std::vector<std::string>{"<question>" + kQuestion + "</question>\n<answer>Nginx</answer>"});
  const EntityGraph g = nginx_graph();
  const QAPair qa = generate_qa(*dftest::chat_client(scripted), g, 1);
  EXPECT_EQ(qa.question, kQuestion);
  EXPECT_EQ(qa.answer, "Nginx");
  EXPECT_EQ(qa.language, Language::En);
  EXPECT_EQ(qa.provenance.seed_entity, "Nginx");
  EXPECT_EQ(qa.provenance.graph_id, g.id);
  EXPECT_EQ(qa.provenance.depth, 1);
  EXPECT_EQ(qa.id, compute_task_id(g.id));
  EXPECT_FALSE(qa.pruned);
  EXPECT_EQ(scripted->requests().at(0).purpose, "qa");
}

TEST(GenerateQa, MissingAnswerRepairsOnceThenFails) {
  auto scripted = std::make_shared<ScriptedChatBackend>(
      std::vector<std::string>{"<question>" + kQuestion + "</question>", "<question>still none</question>"});
  try {
    generate_qa(*dftest::chat_client(scripted), nginx_graph(), 1);
    FAIL();
  } catch (const QaError& e) {
    EXPECT_EQ(e.kind(), "MalformedQaResponse");
  }
  EXPECT_EQ(scripted->call_count(), 2u);
  EXPECT_EQ(scripted->requests().at(1).messages.size(), 3u);
}

TEST(GenerateQa, RepairRecovers) {
  auto scripted = std::make_shared<ScriptedChatBackend>(
      std::vector<std::string>{"no tags", "<question>" + kQuestion + "</question><answer>Nginx</answer>"});
  EXPECT_EQ(generate_qa(*dftest::chat_client(scripted), nginx_graph(), 1).answer, "Nginx");
}

TEST(GenerateQa, ChineseGraphGivesChineseQuestion) {
  const ProviderSet p = dftest::mock_providers();
  const EntityGraph g = explore_entity(p, {"碧岩茶社", std::nullopt, std::nullopt, std::nullopt}, 1, ExploreOptions{});
  const QAPair qa = generate_qa(*p.chat, g, 3);
  EXPECT_EQ(qa.language, Language::Zh);
  EXPECT_EQ(detect_language(qa.question), Language::Zh);
}

TEST(GenerateQa, EmptyGraph) {
  auto scripted = std::make_shared<ScriptedChatBackend>(std::vector<std::string>{});
  try {
    generate_qa(*dftest::chat_client(scripted), EntityGraph{}, 1);
    FAIL();
  } catch (const QaError& e) {
    EXPECT_EQ(e.kind(), "EmptyGraph");
  }
  EXPECT_EQ(scripted->call_count(), 0u);
}

TEST(Prune, RewritesDateIntoVagueClue) {
  const QAPair original = pair(
      "Which open-source web server, first released on 4 October 2004 by Igor Sysoev, powers many busy sites?", "Nginx");
  const std::string rewrite = "Which open-source web server, first released in the early 2000s by a Russian engineer, "
                              "powers many busy sites?";
  auto scripted = std::make_shared<ScriptedChatBackend>(
      std::vector<std::string>{"<question>" + rewrite + "</question><answer>Nginx</answer>"});
  const QAPair pruned = prune_clues(*dftest::chat_client(scripted), original, 1);
  EXPECT_TRUE(pruned.pruned);
  EXPECT_EQ(pruned.question, rewrite);
  EXPECT_EQ(pruned.answer, "Nginx");
  EXPECT_FALSE(text::contains(pruned.question, "2004"));
  EXPECT_THROW(prune_clues(*dftest::chat_client(scripted), pruned, 1), PreconditionError);
}

TEST(Prune, ChangedAnswerOrEmptyQuestionKeepsOriginal) {
  const QAPair original = pair(kQuestion, "Nginx");
  for (const std::string& reply : {std::string("<question>" + kQuestion + "</question><answer>Apache</answer>"),
                                   std::string("<question> </question><answer>Nginx</answer>"),
                                   std::string("no blocks")}) {
    auto scripted = std::make_shared<ScriptedChatBackend>(std::vector<std::string>{reply});
    const QAPair out = prune_clues(*dftest::chat_client(scripted), original, 1);
    EXPECT_EQ(out, original) << reply;
  }
}

TEST(Prune, MockPruneIsAFixedPoint) {
  const ProviderSet p = dftest::mock_providers();
  const EntityGraph g = explore_entity(p, {"Nginx", std::nullopt, std::nullopt, std::nullopt}, 2, ExploreOptions{});
  const QAPair qa = generate_qa(*p.chat, g, 5);
  const QAPair once = prune_clues(*p.chat, qa, 6);
  EXPECT_EQ(once.answer, qa.answer);
  if (once.pruned) {
    QAPair again_input = once;
    again_input.pruned = false;
    EXPECT_EQ(prune_clues(*p.chat, again_input, 6).question, once.question);
  }
}

TEST(Rules, Verdicts) {
  EXPECT_TRUE(check_qa_rules(pair(kQuestion, "Nginx")).accepted);
  EXPECT_EQ(check_qa_rules(pair("Which server is nginx, really, in the end?", "Nginx")).reason, "AnswerLeak");
  EXPECT_EQ(check_qa_rules(pair("Which server?", "Nginx")).reason, "TooShort");
  EXPECT_EQ(check_qa_rules(pair(std::string(2001, 'q'), "Nginx")).reason, "TooLong");
  EXPECT_TRUE(check_qa_rules(pair(std::string(2000, 'q'), "Nginx")).accepted);
  EXPECT_TRUE(check_qa_rules(pair(std::string(20, 'q'), "Nginx")).accepted);
  EXPECT_EQ(check_qa_rules(pair(std::string(19, 'q'), "Nginx")).reason, "TooShort");
  EXPECT_EQ(check_qa_rules(pair(kQuestion, "  ")).reason, "EmptyField");
  EXPECT_EQ(check_qa_rules(pair("", "Nginx")).reason, "EmptyField");
  // Length counts code points, not bytes.
  EXPECT_EQ(check_qa_rules(pair("哪一家茶社由退休教师创办", "碧岩茶社")).reason, "TooShort");
}

TEST(Validate, JudgeVerdicts) {
  const QAPair qa = pair(kQuestion, "Nginx");
  auto make = [](std::string reply) {
    return dftest::chat_client(std::make_shared<ScriptedChatBackend>(std::vector<std::string>{std::move(reply)}));
  };
  EXPECT_TRUE(validate_qa(make("{\"acceptable\": true}").get(), qa, 1).accepted);
  const QaVerdict no = validate_qa(make("verdict: {\"acceptable\": false, \"reason\": \"ambiguous\"}").get(), qa, 1);
  EXPECT_EQ(no.reason, "JudgeRejected");
  EXPECT_EQ(no.detail, "ambiguous");
  EXPECT_EQ(validate_qa(make("yes").get(), qa, 1).reason, "JudgeProtocol");
  EXPECT_TRUE(validate_qa(nullptr, qa, 1).accepted);
  EXPECT_EQ(validate_qa(nullptr, pair(kQuestion + " Nginx", "Nginx"), 1).reason, "AnswerLeak");
}

TEST(Validate, UnavailableJudgeKeepsDeterministicVerdict) {
  auto scripted = std::make_shared<ScriptedChatBackend>(std::vector<std::string>{});
  scripted->fail_next(100, true);
  EXPECT_TRUE(validate_qa(dftest::chat_client(scripted).get(), pair(kQuestion, "Nginx"), 1).accepted);
}

TEST(Stage2, MockRunAndResume) {
  const ProviderSet p = dftest::mock_providers();
  std::vector<EntityGraph> graphs;
  for (const char* n : {"Nginx", "Lanternfall", "Quillmoth Studio", "碧岩茶社", "Igor Sysoev"}) {
    graphs.push_back(explore_entity(p, {n, std::nullopt, std::nullopt, std::nullopt}, 2, ExploreOptions{}));
  }
  dftest::TempDir dir;
  Stage2Config c;
  c.seed = 3;
  const Stage2Result full = run_stage2(dftest::mock_providers(), graphs, c, dir / "full.jsonl");
  EXPECT_EQ(full.graphs, 5u);
  std::size_t rejected = 0;
  for (const auto& [reason, n] : full.rejected) rejected += n;
  EXPECT_EQ(full.accepted + full.failed + rejected, 5u);
  EXPECT_EQ(count_records(dir / "full.jsonl"), full.accepted);
  for (const auto& row : read_json_lines(dir / "full.jsonl")) {
    EXPECT_TRUE(check_qa_rules(row.get<QAPair>()).accepted);
  }

  for (std::size_t stop_at : {1u, 3u}) {
    CancelToken cancel;
    std::atomic<std::size_t> calls{0};
    ProviderSet cut = dftest::mock_providers();
    auto inner = std::make_shared<SimulatedLlm>(cut.world);
    cut.chat = dftest::chat_client(std::make_shared<ScriptedChatBackend>([&](const ChatRequest& r) {
                                     if (r.purpose == "qa" && ++calls > stop_at) cancel.cancel();
                                     return inner->complete(r).text;
                                   }),
                                   cut.ledger);
    const auto part = dir / ("part" + std::to_string(stop_at) + ".jsonl");
    EXPECT_THROW(run_stage2(cut, graphs, c, part, &cancel), ProviderError);
    c.workers = 3;
    const Stage2Result resumed = run_stage2(dftest::mock_providers(), graphs, c, part);
    c.workers = 1;
    EXPECT_EQ(read_json_lines(part), read_json_lines(dir / "full.jsonl"));
    EXPECT_EQ(resumed.accepted, full.accepted);
    EXPECT_EQ(resumed.rejected, full.rejected);
  }
}

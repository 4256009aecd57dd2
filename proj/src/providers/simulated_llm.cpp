// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

#include "deepforge/common/hash.hpp"
#include "deepforge/common/rng.hpp"
#include "deepforge/common/text.hpp"
#include "deepforge/datamodel/serialize.hpp"
#include "deepforge/providers/errors.hpp"
#include "deepforge/providers/mock_chat.hpp"

namespace deepforge {

using nlohmann::json;

namespace {

std::string hint(const ChatRequest& r, const char* key) {
  auto it = r.hints.find(key);
  if (it == r.hints.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

Rng rng_for(const ChatRequest& r, std::string_view salt) { return Rng(HashBuilder().add(r.seed).add(salt).value()); }

bool repairing(const ChatRequest& r) {
  const Message& last = r.messages.back();
  return last.role == Role::User && last.plain_text().rfind(kRepairNoticePrefix, 0) == 0;
}

int tool_turns(const ChatRequest& r) {
  return static_cast<int>(
      std::count_if(r.messages.begin(), r.messages.end(), [](const Message& m) { return m.role == Role::Tool; }));
}

std::string capitalize_first(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

/// Case-insensitive (ASCII) replacement of every occurrence of `name`.
std::string replace_name(const std::string& s, const std::string& name, const std::string& with) {
  if (name.empty()) return s;
  const std::string folded = text::casefold(s);
  const std::string needle = text::casefold(name);
  std::string out;
  std::size_t i = 0;
  while (true) {
    const auto pos = folded.find(needle, i);
    if (pos == std::string::npos) break;
    out.append(s, i, pos - i);
    out += with;
    i = pos + needle.size();
  }
  out.append(s, i, std::string::npos);
  return out;
}

std::string strip_period(std::string s) {
  while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.pop_back();
  return s;
}

std::string indefinite(const std::string& noun) {
  const char c = noun.empty() ? 'x' : static_cast<char>(std::tolower(static_cast<unsigned char>(noun[0])));
  return (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' ? "an " : "a ") + noun;
}

std::string vague_year(int y) {
  const int d = y % 10;
  const char* part = d <= 3 ? "early" : d <= 6 ? "mid" : "late";
  return std::string("the ") + part + " " + std::to_string(y - d) + "s";
}

std::string vague_count(long n) {
  if (n < 10) return "a handful of";
  if (n < 100) return "dozens of";
  if (n < 1000) return "a few hundred";
  if (n < 10000) return "several thousand";
  return "tens of thousands of";
}

/// Loose answer match: folded alphanumerics, containment either way.
std::string fold_answer(std::string_view s) {
  std::string out;
  bool space = false;
  for (unsigned char c : text::casefold(s)) {
    if (std::isalnum(c) || c >= 0x80) {
      if (space && !out.empty()) out.push_back(' ');
      out.push_back(static_cast<char>(c));
      space = false;
    } else {
      space = true;
    }
  }
  return out;
}

bool loosely_equivalent(std::string_view gold, std::string_view answer) {
  const std::string g = fold_answer(gold);
  const std::string a = fold_answer(answer);
  if (g.empty() || a.empty()) return false;
  if (text::contains(a, g)) return true;
  return text::contains(g, a) && a.size() * 10 >= g.size() * 6;
}

std::string kind_word(const std::optional<EntityProfile>& p, bool zh) {
  const std::string kind = p ? p->kind : "";
  if (zh) {
    if (kind == "organization") return "机构";
    if (kind == "person") return "人物";
    if (kind == "place") return "地方";
    return "对象";
  }
  if (kind.empty() || kind == "famous") return "entity";
  return kind;
}

std::vector<std::string> sentences_of(std::string_view content) {
  std::vector<std::string> out;
  for (const auto& line : text::split_lines(content)) {
    std::string current;
    for (std::size_t i = 0; i < line.size(); ++i) {
      current.push_back(line[i]);
      if (line[i] == '.' && (i + 1 == line.size() || line[i + 1] == ' ') &&
          !(i > 0 && std::isdigit(static_cast<unsigned char>(line[i - 1])) && i + 1 < line.size() &&
            std::isdigit(static_cast<unsigned char>(line[i + 1])))) {
        if (auto t = text::trim(current); !t.empty()) out.push_back(t);
        current.clear();
      }
    }
    if (auto t = text::trim(current); !t.empty()) out.push_back(t);
  }
  return out;
}

std::set<std::string> word_set(std::string_view s) {
  std::set<std::string> out;
  std::string cur;
  for (unsigned char c : text::casefold(s)) {
    if (std::isalnum(c) || c >= 0x80) {
      cur.push_back(static_cast<char>(c));
    } else if (!cur.empty()) {
      if (cur.size() > 2) out.insert(cur);
      cur.clear();
    }
  }
  if (cur.size() > 2) out.insert(cur);
  return out;
}

/// Links of the most recent search observation in the conversation.
std::vector<std::string> last_search_links(const ChatRequest& r) {
  for (auto it = r.messages.rbegin(); it != r.messages.rend(); ++it) {
    if (it->role != Role::Tool || it->segments.empty()) continue;
    const json obs = json::parse(it->segments[0].text, nullptr, false);
    if (obs.is_discarded() || !obs.is_object() || (obs.value("tool", "") != "search" && obs.value("tool", "") != "search_google")) continue;
    std::vector<std::string> links;
    for (const auto& per_query : obs.value("result", json::array())) {
      for (const auto& hit : per_query.value("hits", json::array())) {
        const std::string link = hit.value("link", "");
        if (!link.empty() && std::find(links.begin(), links.end(), link) == links.end()) links.push_back(link);
      }
    }
    return links;
  }
  return {};
}

std::string call_block(const std::string& tag, const std::string& name, json args) {
  return "<" + tag + ">\n" + json{{"name", name}, {"arguments", std::move(args)}}.dump() + "\n</" + tag + ">";
}

}  // namespace

SimulatedLlm::SimulatedLlm(std::shared_ptr<const MockWorld> world) : world_(std::move(world)) {}

ChatResponse SimulatedLlm::complete(const ChatRequest& r) {
  std::string out;
  if (r.purpose == "nouns") {
    out = nouns(r);
  } else if (r.purpose == "extract") {
    out = extract(r);
  } else if (r.purpose == "explore") {
    out = explore(r);
  } else if (r.purpose == "qa") {
    out = qa(r);
  } else if (r.purpose == "prune") {
    out = prune(r);
  } else if (r.purpose == "validate_qa") {
    out = validate_qa(r);
  } else if (r.purpose == "summarize") {
    out = summarize(r);
  } else if (r.purpose == "agent") {
    out = agent(r);
  } else if (r.purpose == "judge_correctness") {
    out = judge_correctness(r);
  } else if (r.purpose == "judge_quality") {
    out = judge_quality(r);
  } else if (r.purpose == "score") {
    out = score(r);
  } else {
    throw ProviderError("MockMiss", "simulator has no behaviour for purpose '" + r.purpose + "'");
  }
  return {FinishReason::Stop, std::move(out)};
}

std::string SimulatedLlm::nouns(const ChatRequest& r) const {
  const int batch = r.hints.value("batch_size", 0);
  std::set<std::string> excluded;
  std::vector<std::string> excluded_list;
  for (const auto& e : r.hints.value("exclude", json::array())) {
    excluded.insert(text::normalize_name(e.get<std::string>()));
    excluded_list.push_back(e.get<std::string>());
  }
  Rng rng = rng_for(r, "nouns");
  std::vector<std::string> fresh;
  for (const auto& n : world_->nouns()) {
    if (static_cast<int>(fresh.size()) >= batch) break;
    if (!excluded.count(text::normalize_name(n.noun))) fresh.push_back(n.noun);
  }
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    const double u = rng.uniform();
    if (u < 0.3) {
      lines.push_back(std::to_string(i + 1) + ". " + fresh[i]);
    } else if (u < 0.4) {
      lines.push_back("- " + fresh[i]);
    } else {
      lines.push_back(fresh[i]);
    }
  }
  // Models repeat themselves: one duplicate and one previously seen noun.
  if (!fresh.empty()) lines.insert(lines.begin() + static_cast<long>(rng.below(lines.size() + 1)), fresh[0] + " ");
  if (!excluded_list.empty()) {
    lines.push_back(excluded_list[rng.below(excluded_list.size())]);
  }
  if (fresh.empty()) {
    for (std::size_t i = 0; i < excluded_list.size() && i < static_cast<std::size_t>(batch); ++i) {
      lines.push_back(excluded_list[i]);
    }
  }
  return text::join(lines, "\n");
}

std::string SimulatedLlm::extract(const ChatRequest& r) const {
  const std::string page = hint(r, "page_text");
  Rng rng = rng_for(r, "extract:" + page);
  std::vector<std::string> lines;
  for (const auto& name : world_->find_entities(page)) {
    const auto p = world_->profile(name);
    if (p && p->kind == "famous") {
      lines.push_back(name + " | " + (name == "Paris" ? "capital city" : "well-known organization"));
    } else if (rng.chance(0.2)) {
      lines.push_back("- " + name);
    } else {
      lines.push_back(name + " | " + (p ? p->description : "mentioned on the page"));
    }
  }
  if (!lines.empty() && rng.chance(0.5)) lines.push_back(text::casefold(text::trim(text::split(lines[0], '|')[0])));
  if (rng.chance(0.5)) lines.push_back("Click here");
  if (rng.chance(0.5)) lines.push_back("2019");
  if (rng.chance(0.3)) lines.push_back("X");
  return text::join(lines, "\n");
}

std::string SimulatedLlm::explore(const ChatRequest& r) const {
  const std::string entity = hint(r, "entity");
  const int step = tool_turns(r);
  Rng rng = rng_for(r, "explore:" + entity + ":" + std::to_string(step));
  const bool repair = repairing(r);
  const std::string think = rng.chance(0.5) ? "<think>Gathering facts about " + entity + ".</think>\n" : "";
  if (step == 0) {
    return think + call_block("function_call", "search_google", {{"query", entity}});
  }
  if (step == 1) {
    const auto links = last_search_links(r);
    std::string url = links.empty() ? MockWorld::entity_url(entity, 1) : links.front();
    for (const auto& l : links) {
      if (text::contains(l, "/entity/")) {
        url = l;
        break;
      }
    }
    // A model that ignores "one function call at a time"; fixed after the notice.
    if (!repair && rng.chance(0.05)) {
      return think + call_block("function_call", "crawl_url_content", {{"url", url}}) + "\n" +
             call_block("function_call", "search_wiki", {{"entities", {entity}}});
    }
    return think + call_block("function_call", "crawl_url_content", {{"url", url}});
  }
  if (step == 2) {
    return think + call_block("function_call", "search_wiki", {{"entities", {entity}}});
  }
  json result;
  if (const auto p = world_->profile(entity)) {
    json rel = json::object();
    for (const auto& [target, description] : p->relations) {
      if (target != entity) rel[target] = description;
    }
    result = {{"entity_self", p->facts}, {"entity_relations", rel}};
  } else {
    result = {{"entity_self", {entity + " is mentioned on a few scattered web pages."}},
              {"entity_relations", json::object()}};
  }
  return "<think>I have enough information about " + entity + ".</think>\n<result>\n" + result.dump(4) +
         "\n</result>";
}

std::string SimulatedLlm::qa(const ChatRequest& r) const {
  EntityGraph g = r.hints.at("graph").get<EntityGraph>();
  const EntityRecord& root = g.records.at(g.root);
  const bool zh = detect_language(text::join(root.entity_self, " ")) == Language::Zh;
  const std::string kw = kind_word(world_->profile(g.root), zh);
  Rng rng = rng_for(r, "qa:" + g.root);

  std::vector<std::string> parts;
  const std::string self = zh ? "它" : "this " + kw;
  auto anonymize = [&](std::string s, const std::string& other, const std::string& other_label) {
    s = replace_name(s, g.root, self);
    if (!other.empty()) s = replace_name(s, other, other_label);
    if (!zh) {
      static const std::regex doubled_article("\\b([Aa]n?|[Tt]he) (an?) ");
      s = std::regex_replace(s, doubled_article, "$2 ");
    }
    return zh ? s : capitalize_first(strip_period(s)) + ".";
  };
  for (std::size_t i = 0; i < root.entity_self.size() && i < 2; ++i) {
    parts.push_back(anonymize(root.entity_self[i], "", ""));
  }
  // One or two hops through explored neighbors.
  std::vector<std::string> neighbors;
  for (const auto& [target, rel] : root.entity_relations) {
    if (g.records.count(target) && target != g.root) neighbors.push_back(target);
  }
  std::sort(neighbors.begin(), neighbors.end(), [](const std::string& a, const std::string& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  for (std::size_t i = 0; i < neighbors.size() && i < 2; ++i) {
    const std::string& t = neighbors[i];
    const std::string tkw = kind_word(world_->profile(t), zh);
    const std::string some = zh ? "某" + tkw : indefinite(tkw);
    const std::string that = zh ? "该" + tkw : "that " + tkw;
    std::string rel = anonymize(root.entity_relations.at(t), t, some);
    if (zh && rel.find("。") == std::string::npos) rel += "。";
    parts.push_back(rel);
    const auto& tfacts = g.records.at(t).entity_self;
    if (!tfacts.empty()) {
      std::string fact = anonymize(tfacts[std::min<std::size_t>(1, tfacts.size() - 1)], t, that);
      if (zh && fact.find("。") == std::string::npos) fact += "。";
      parts.push_back(fact);
    }
  }
  if (!zh && rng.chance(0.1)) parts.push_back("Some say it was the first " + kw + " of its kind in its home town.");
  std::string question = zh ? text::join(parts, "") + "请问它的名称是什么？"
                            : text::join(parts, " ") + " What is the name of this " + kw + "?";
  std::string out = "<thinking>\nThe question chains facts about " + std::to_string(parts.size()) +
                    " clues so that several lookups are needed.\n</thinking>\n<question>\n" + question +
                    "\n</question>\n";
  if (!repairing(r) && rng.chance(0.05)) return out;
  return out + "<answer>\n" + g.root + "\n</answer>";
}

std::string SimulatedLlm::prune(const ChatRequest& r) const {
  std::string q = hint(r, "question");
  const std::string answer = hint(r, "answer");
  Rng rng = rng_for(r, "prune:" + q);
  if (detect_language(q) == Language::Zh) {
    static const std::regex zh_year("([0-9]{3})[0-9]年");
    q = std::regex_replace(q, zh_year, "$10年代");
    static const std::regex digits("[0-9]+");
    q = std::regex_replace(q, digits, "若干");
  } else {
    static const std::regex number("\\b([0-9]+)\\b(?!-)");
    std::string out;
    auto begin = std::sregex_iterator(q.begin(), q.end(), number);
    std::size_t last = 0;
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
      const auto& m = *it;
      out.append(q, last, static_cast<std::size_t>(m.position()) - last);
      const long n = std::stol(m.str(1));
      out += (n >= 1000 && n <= 2099 && m.str(1).size() == 4) ? vague_year(static_cast<int>(n)) : vague_count(n);
      last = static_cast<std::size_t>(m.position() + m.length());
    }
    out.append(q, last, std::string::npos);
    q = out;
    if (rng.chance(0.5)) q = replace_name(q, "the first", "one of the earliest");
  }
  return "<question>\n" + q + "\n</question>\n<answer>\n" + answer + "\n</answer>";
}

std::string SimulatedLlm::validate_qa(const ChatRequest& r) const {
  const std::string q = text::casefold(hint(r, "question"));
  for (const char* s : {"the first", "the highest", "the largest", "the only", "最早", "第一"}) {
    if (text::contains(q, s)) {
      return json{{"acceptable", false}, {"reason", std::string("uses the unique superlative \"") + s + "\""}}.dump();
    }
  }
  return json{{"acceptable", true}, {"reason", "vague, multi-hop and centred on an obscure entity"}}.dump();
}

std::string SimulatedLlm::summarize(const ChatRequest& r) const {
  const auto query_words = word_set(hint(r, "query"));
  const auto sentences = sentences_of(hint(r, "content"));
  std::vector<std::pair<std::size_t, std::size_t>> scored;  // (overlap, index)
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::size_t overlap = 0;
    for (const auto& w : word_set(sentences[i])) overlap += query_words.count(w);
    if (overlap > 0) scored.emplace_back(overlap, i);
  }
  if (scored.empty()) return "The page does not contain information relevant to the query.";
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  scored.resize(std::min<std::size_t>(scored.size(), 5));
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  std::vector<std::string> picked;
  for (const auto& [overlap, i] : scored) picked.push_back(sentences[i]);
  return "Relevant information: " + text::join(picked, " ");
}

std::string SimulatedLlm::agent(const ChatRequest& r) const {
  const std::string question = hint(r, "question");
  const std::string gold = hint(r, "gold");
  Rng plan(HashBuilder().add(r.seed).add("agent-plan").add(question).value());
  const int n_calls = 2 + static_cast<int>(plan.below(11));
  const double outcome = plan.uniform();
  const bool hallucinate = plan.chance(0.08);
  const int stray_turn = plan.chance(0.08) ? static_cast<int>(plan.below(static_cast<std::size_t>(n_calls))) : -1;
  const int malformed_turn = plan.chance(0.04) ? static_cast<int>(plan.below(static_cast<std::size_t>(n_calls))) : -1;

  std::string candidate = gold;
  std::string final_answer = gold;
  if (outcome >= 0.45 && outcome < 0.7) {
    final_answer = "the " + gold + " mentioned in the sources";
  } else if (outcome >= 0.7) {
    std::string wrong = "an unrelated local group";
    if (const auto p = world_->profile(gold); p && !p->relations.empty()) {
      wrong = p->relations.begin()->first;
    }
    candidate = wrong;
    final_answer = wrong;
  }

  const int step = tool_turns(r);
  const bool repair = repairing(r);
  if (step >= n_calls) {
    std::string think = "The evidence gathered so far points to " + candidate + ".";
    if (hallucinate) think += " " + std::string(kHallucinationPhrase) + ".";
    return "<think>\n" + think + "\n</think>\n<answer>" + final_answer + "</answer>";
  }
  if (step == malformed_turn && !repair) {
    return "<think>\nLet me search again.\n</think>\n<tool_call>\n{\"name\": \"search\", \"arguments\": {\"query\": [\"" +
           candidate + "\"]\n</tool_call>";
  }

  static constexpr std::array<const char*, 12> kCycle = {"search", "visit_urls", "search", "search_wiki",
                                                         "execute_code", "search", "visit_urls", "search_wiki",
                                                         "search", "visit_urls", "execute_code", "search_wiki"};
  std::string tool = kCycle[static_cast<std::size_t>(step) % kCycle.size()];
  const auto links = last_search_links(r);
  if (tool == "visit_urls" && links.empty()) tool = "search";

  json args;
  std::string think;
  if (tool == "search") {
    if (step == 0) {
      std::vector<std::string> queries;
      for (const auto& s : sentences_of(question)) {
        if (queries.size() == 3) break;
        queries.push_back(text::preview(strip_period(s), 80));
      }
      if (queries.empty()) queries.push_back(text::preview(question, 80));
      args = {{"query", queries}};
      think = "I need to break the question into its clues and search for each of them.";
    } else {
      args = {{"query", {candidate, candidate + " history", candidate + " founded"}}};
      think = "A likely candidate is " + candidate + ". I should search for more details to confirm it.";
    }
  } else if (tool == "visit_urls") {
    std::vector<std::string> urls(links.begin(), links.begin() + static_cast<long>(std::min<std::size_t>(3, links.size())));
    args = {{"urls", urls}, {"query", text::preview(question, 120)}};
    think = "The search results look relevant. I will read the top pages to extract the details.";
  } else if (tool == "search_wiki") {
    args = {{"entities", {candidate}}};
    think = "Let me check the encyclopedia entry for " + candidate + " to verify the clues.";
  } else {
    const int a = 10 + static_cast<int>(plan.below(900));
    const int b = 2 + static_cast<int>(plan.below(30));
    args = {{"code", "a = " + std::to_string(a) + "\nb = " + std::to_string(b) + "\nprint(a * b)\nprint(round(a / b, 2))"}};
    think = "I will double-check the arithmetic behind the time ranges with a short calculation.";
  }
  std::string out = "<think>\n" + think + "\n</think>\n";
  if (step == stray_turn) out += "Let me look into this.\n";
  return out + call_block("tool_call", tool, args);
}

std::string SimulatedLlm::judge_correctness(const ChatRequest& r) const {
  return json{{"equivalent", loosely_equivalent(hint(r, "gold"), hint(r, "answer")) ? "yes" : "no"}}.dump();
}

std::string SimulatedLlm::judge_quality(const ChatRequest& r) const {
  json verdict;
  if (text::contains(hint(r, "trajectory_text"), kHallucinationPhrase)) {
    verdict = {{"quality_score", "Unqualified"},
               {"reason", "The model claims a registry check that no tool call performed."},
               {"issues", {"Tool Call Hallucination"}}};
  } else {
    verdict = {{"quality_score", "Qualified"},
               {"reason", "Every claim is backed by a tool observation and the reasoning is consistent."},
               {"issues", json::array()}};
  }
  return "```json\n" + verdict.dump(4) + "\n```";
}

std::string SimulatedLlm::score(const ChatRequest& r) const {
  const bool correct = loosely_equivalent(hint(r, "gold"), hint(r, "final_answer"));
  const bool hallucinated = text::contains(hint(r, "trajectory_text"), kHallucinationPhrase);
  const int calls = r.hints.value("tool_call_count", 0);
  Rng rng = rng_for(r, "score");
  const int j = static_cast<int>(rng.below(2));
  const int factual = correct ? 8 + j : 2 + j;
  const int logical = hallucinated ? 3 : (correct ? 7 : 5) + j;
  const int overall = std::clamp(2 + std::min(calls, 8) / 2 + (correct ? 3 : 0) - (hallucinated ? 2 : 0), 0, 10);
  return json{{"logical_consistency", logical}, {"factual_correctness", factual}, {"overall_quality", overall}}.dump();
}

}  // namespace deepforge

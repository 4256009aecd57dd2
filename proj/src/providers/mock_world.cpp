// SPDX-License-Identifier: Apache-2.0
#include "deepforge/providers/mock_world.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <set>

#include "deepforge/common/hash.hpp"
#include "deepforge/common/text.hpp"
#include "deepforge/providers/url.hpp"

namespace deepforge {

namespace embedded {
std::string_view mock_world_fixture();
}

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 24> kSyllables = {
    "va", "ro", "thel", "mi", "sa", "dor", "len", "qui", "bar", "tis", "ko", "nel",
    "fa", "rin", "zu", "mor", "pel", "da", "vin", "shu", "bren", "ca", "lo", "ther"};

struct Suffix {
  std::string_view word;
  std::string_view kind;
  std::string_view unit;
};

constexpr std::array<Suffix, 12> kSuffixes = {{
    {"Press", "independent publisher", "titles"},
    {"Guild", "craft guild", "commissioned pieces"},
    {"Foundation", "small charitable foundation", "grant files"},
    {"Collective", "artist collective", "exhibition pieces"},
    {"Observatory", "amateur observatory", "plate photographs"},
    {"Workshop", "instrument workshop", "restored instruments"},
    {"Society", "local history society", "oral history recordings"},
    {"Institute", "niche research institute", "field reports"},
    {"Archive", "community archive", "donated letters"},
    {"Ensemble", "chamber music ensemble", "concert programmes"},
    {"Atelier", "design atelier", "pattern drafts"},
    {"Consortium", "regional consortium", "survey maps"},
}};

constexpr std::array<std::string_view, 12> kFirstNames = {"Mirel", "Adaire", "Tomas", "Ilse",  "Corin", "Vesna",
                                                           "Oskar", "Liane",  "Petra", "Emric", "Hanne", "Jora"};
constexpr std::array<std::string_view, 6> kSurnameEndings = {"ova", "ski", "ard", "elli", "sen", "ez"};
constexpr std::array<std::string_view, 6> kTownEndings = {"ford", "vale", "mere", "holt", "wick", "stead"};
constexpr std::array<std::string_view, 8> kOccupations = {"archivist", "luthier",    "cartographer", "printmaker",
                                                          "astronomer", "composer", "botanist",     "typographer"};
constexpr std::array<std::string_view, 8> kTopics = {"river maps",      "wood varnish",  "tide tables", "folk tunes",
                                                     "letter spacing", "moss surveys", "bell casting", "star charts"};
constexpr std::array<std::string_view, 6> kEvents = {"lecture series", "summer school", "restoration project",
                                                     "travelling exhibition", "field survey", "festival"};
constexpr std::array<std::string_view, 8> kFamous = {"UNESCO", "Paris", "Google", "BBC",
                                                     "NASA",   "European Union", "Mozilla", "Wikipedia"};

constexpr std::array<std::string_view, 10> kFiller = {
    "Local newsletters mention {name} in connection with seasonal open days.",
    "A volunteer inventory from {year} lists boxes of correspondence connected to {name}.",
    "Few photographs of {name} circulate online, and most of them come from private collections.",
    "Accounts of {name} differ in small details, which makes cross-checking sources worthwhile.",
    "Regional directories list {name} under several slightly different spellings.",
    "The people behind {name} rarely give interviews and prefer printed leaflets.",
    "Minutes of a meeting held in {year} refer to {name} only in passing.",
    "Reports suggest that interest in {name} has grown slowly but steadily.",
    "A short documentary filmed near {town} includes a brief segment on {name}.",
    "Visitors to {town} sometimes confuse {name} with a similarly named group nearby.",
};

std::uint64_t name_hash(std::string_view name) { return HashBuilder().add("mock-entity").add(name).value(); }
std::uint64_t mixk(std::uint64_t h, std::uint64_t k) { return mix64(h ^ (k * 0x9e3779b97f4a7c15ULL)); }

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string article(std::string_view noun) {
  if (noun.empty()) return "a";
  const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(noun[0])));
  return (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') ? "an" : "a";
}

std::string stem(std::uint64_t h, int syllables) {
  std::string out;
  std::size_t previous = kSyllables.size();
  for (int i = 0; i < syllables; ++i) {
    std::size_t k = mixk(h, 100 + i) % kSyllables.size();
    if (k == previous) k = (k + 1) % kSyllables.size();
    out += kSyllables[k];
    previous = k;
  }
  return capitalize(out);
}

bool decomposes(std::string_view lower) {
  std::vector<bool> ok(lower.size() + 1, false);
  ok[0] = true;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!ok[i]) continue;
    for (auto syl : kSyllables) {
      if (lower.compare(i, syl.size(), syl) == 0) ok[i + syl.size()] = true;
    }
  }
  return ok[lower.size()];
}

bool is_capitalized_word(std::string_view w) {
  if (w.size() < 2 || !(w[0] >= 'A' && w[0] <= 'Z')) return false;
  return std::all_of(w.begin() + 1, w.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

const Suffix* suffix_of(std::string_view word) {
  for (const auto& s : kSuffixes) {
    if (s.word == word) return &s;
  }
  return nullptr;
}

std::string town_name(std::uint64_t h) {
  return stem(mixk(h, 7), 2) + std::string(kTownEndings[mixk(h, 8) % kTownEndings.size()]);
}

std::string fill(std::string_view tmpl, const std::string& name, const std::string& town, int year) {
  std::string s(tmpl);
  s = text::replace_all(s, "{name}", name);
  s = text::replace_all(s, "{town}", town);
  s = text::replace_all(s, "{year}", std::to_string(year));
  return s;
}

std::vector<std::string> filler_sentences(const std::string& name, std::uint64_t h, std::size_t count) {
  const std::string town = town_name(h);
  std::vector<std::string> out;
  const std::size_t start = mixk(h, 40) % kFiller.size();
  for (std::size_t i = 0; i < count; ++i) {
    const int year = 1980 + static_cast<int>(mixk(h, 50 + i) % 40);
    out.push_back(fill(kFiller[(start + i * 3) % kFiller.size()], name, town, year));
  }
  return out;
}

std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string para(std::string_view s) { return "<p>" + html_escape(s) + "</p>\n"; }

std::optional<int> parse_index(std::string_view s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string wiki_text_for(const EntityProfile& p, std::uint64_t h) {
  std::string out = p.name + "\n\n" + text::join(p.facts, " ") + "\n";
  if (p.kind == "famous") return out;
  if (p.language == Language::Zh) {
    out += "\n相关\n";
    for (const auto& [target, rel] : p.relations) out += rel + "。\n";
    return out;
  }
  out += "\nHistory\n" + text::join(filler_sentences(p.name, h, 8), " ") + "\n\nConnections\n";
  for (const auto& [target, rel] : p.relations) out += rel + ".\n";
  return out;
}

}  // namespace

namespace mockgen {

std::string org_name(std::uint64_t h) {
  const int syllables = 2 + static_cast<int>(mixk(h, 1) % 2);
  return stem(h, syllables) + " " + std::string(kSuffixes[mixk(h, 2) % kSuffixes.size()].word);
}

std::string person_name(std::uint64_t h) {
  return std::string(kFirstNames[mixk(h, 3) % kFirstNames.size()]) + " " + stem(mixk(h, 4), 2) +
         std::string(kSurnameEndings[mixk(h, 5) % kSurnameEndings.size()]);
}

bool is_org_name(std::string_view name) {
  const auto space = name.find(' ');
  if (space == std::string_view::npos || name.find(' ', space + 1) != std::string_view::npos) return false;
  const std::string_view first = name.substr(0, space);
  if (!is_capitalized_word(first) || first.size() < 4 || !suffix_of(name.substr(space + 1))) return false;
  return decomposes(text::casefold(first));
}

bool is_person_name(std::string_view name) {
  const auto space = name.find(' ');
  if (space == std::string_view::npos || name.find(' ', space + 1) != std::string_view::npos) return false;
  const std::string_view first = name.substr(0, space);
  const std::string_view last = name.substr(space + 1);
  if (std::find(kFirstNames.begin(), kFirstNames.end(), first) == kFirstNames.end()) return false;
  if (!is_capitalized_word(last)) return false;
  const std::string lower = text::casefold(last);
  for (auto ending : kSurnameEndings) {
    if (lower.size() > ending.size() && lower.compare(lower.size() - ending.size(), ending.size(), ending) == 0 &&
        decomposes(std::string_view(lower).substr(0, lower.size() - ending.size()))) {
      return true;
    }
  }
  return false;
}

}  // namespace mockgen

std::shared_ptr<const MockWorld> MockWorld::builtin() {
  static const std::shared_ptr<const MockWorld> world = from_json(json::parse(embedded::mock_world_fixture()));
  return world;
}

std::shared_ptr<const MockWorld> MockWorld::from_json(const json& fixture) {
  std::shared_ptr<MockWorld> w(new MockWorld());
  for (const auto& n : fixture.at("nouns")) {
    NounInfo info;
    info.noun = n.at("noun").get<std::string>();
    info.slug = n.at("slug").get<std::string>();
    if (n.contains("entities")) info.entities = n["entities"].get<std::vector<std::string>>();
    std::uint64_t k = 0;
    while (info.entities.size() < 4) {
      const std::string name = mockgen::org_name(HashBuilder().add("noun-entity").add(info.noun).add(k++).value());
      if (std::find(info.entities.begin(), info.entities.end(), name) == info.entities.end()) {
        info.entities.push_back(name);
      }
    }
    w->nouns_.push_back(std::move(info));
  }
  for (const auto& [name, e] : fixture.at("entities").items()) {
    EntityProfile p;
    p.name = name;
    p.description = e.at("description").get<std::string>();
    p.kind = e.value("kind", "entity");
    p.language = e.value("language", "en") == "zh" ? Language::Zh : Language::En;
    p.facts = e.at("facts").get<std::vector<std::string>>();
    p.relations = e.at("relations").get<std::map<std::string, std::string>>();
    p.wiki_text = wiki_text_for(p, name_hash(name));
    w->authored_.emplace(name, std::move(p));
  }
  for (const auto& [url, page] : fixture.at("pages").items()) {
    Page pg;
    pg.content_type = page.value("content_type", "text/html");
    pg.html = page.at("html").get<std::string>();
    if (page.contains("answer_key")) pg.answer_key = page["answer_key"].get<std::vector<std::string>>();
    w->pages_.emplace(url, std::move(pg));
  }
  for (const auto& s : fixture.at("search")) {
    SearchOverride o;
    o.keywords = s.at("keywords").get<std::vector<std::string>>();
    for (const auto& h : s.at("hits")) {
      o.hits.push_back(SearchHit{h.at("title").get<std::string>(), h.at("link").get<std::string>(),
                                 h.at("snippet").get<std::string>(), 0});
    }
    w->search_overrides_.push_back(std::move(o));
  }
  if (fixture.contains("famous_relations")) {
    w->famous_relations_ = fixture["famous_relations"].get<std::map<std::string, std::string>>();
  }
  return w;
}

const NounInfo* MockWorld::find_noun(std::string_view noun_or_slug) const {
  const std::string key = text::normalize_name(noun_or_slug);
  for (const auto& n : nouns_) {
    if (text::normalize_name(n.noun) == key || n.slug == key) return &n;
  }
  return nullptr;
}

std::optional<EntityProfile> MockWorld::profile(std::string_view name) const {
  if (auto it = authored_.find(name); it != authored_.end()) return it->second;
  const std::uint64_t h = name_hash(name);
  const std::string n(name);
  const std::string town = town_name(h);
  auto famous_relation = [&](EntityProfile& p) {
    const std::string famous(kFamous[mixk(h, 6) % kFamous.size()]);
    auto it = famous_relations_.find(famous);
    const std::string tmpl = it == famous_relations_.end() ? "{name} is loosely associated with " + famous : it->second;
    p.relations[famous] = text::replace_all(tmpl, "{name}", n);
  };
  if (mockgen::is_org_name(name)) {
    const Suffix* suffix = suffix_of(name.substr(name.find(' ') + 1));
    EntityProfile p;
    p.name = n;
    p.kind = "organization";
    const int founded = 1950 + static_cast<int>(mixk(h, 10) % 66);
    const int later = std::min(2024, founded + 5 + static_cast<int>(mixk(h, 11) % 20));
    const int works = 20 + static_cast<int>(mixk(h, 12) % 880);
    p.description = std::string(suffix->kind) + " based in " + town;
    p.facts = {n + " is " + article(suffix->kind) + " " + std::string(suffix->kind) + " based in " + town + ".",
               n + " was founded in " + std::to_string(founded) + ".",
               "By " + std::to_string(later) + ", " + n + " had catalogued " + std::to_string(works) + " " +
                   std::string(suffix->unit) + "."};
    const std::string founder = mockgen::person_name(mixk(h, 13));
    p.relations[founder] = n + " was founded by " + founder;
    const std::string partner = mockgen::org_name(mixk(h, 14));
    if (partner != n) {
      p.relations[partner] =
          n + " co-organized " + article(kEvents[mixk(h, 15) % kEvents.size()]) + " " +
          std::string(kEvents[mixk(h, 15) % kEvents.size()]) + " with " + partner;
    }
    famous_relation(p);
    p.wiki_text = wiki_text_for(p, h);
    return p;
  }
  if (mockgen::is_person_name(name)) {
    EntityProfile p;
    p.name = n;
    p.kind = "person";
    const std::string occupation(kOccupations[mixk(h, 20) % kOccupations.size()]);
    const int born = 1920 + static_cast<int>(mixk(h, 21) % 70);
    const int essays = 3 + static_cast<int>(mixk(h, 22) % 40);
    p.description = occupation + " from " + town;
    p.facts = {n + " is " + article(occupation) + " " + occupation + " from " + town + ".",
               n + " was born in " + std::to_string(born) + ".",
               n + " has written " + std::to_string(essays) + " essays on " +
                   std::string(kTopics[mixk(h, 23) % kTopics.size()]) + "."};
    const std::string org = mockgen::org_name(mixk(h, 24));
    p.relations[org] = n + " served as director of " + org;
    const std::string mentor = mockgen::person_name(mixk(h, 25));
    if (mentor != n) p.relations[mentor] = n + " studied under " + mentor;
    famous_relation(p);
    p.wiki_text = wiki_text_for(p, h);
    return p;
  }
  return std::nullopt;
}

std::vector<std::string> MockWorld::find_entities(std::string_view text) const {
  std::vector<std::pair<std::size_t, std::string>> found;
  for (const auto& [name, p] : authored_) {
    if (const auto pos = text.find(name); pos != std::string_view::npos) found.emplace_back(pos, name);
  }
  // Two-word candidates: consecutive ASCII words separated by one space.
  std::vector<std::pair<std::size_t, std::string_view>> words;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isalpha(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
    words.emplace_back(i, text.substr(i, j - i));
    i = j;
  }
  for (std::size_t k = 0; k + 1 < words.size(); ++k) {
    const auto [pos, w1] = words[k];
    const auto [pos2, w2] = words[k + 1];
    if (pos2 != pos + w1.size() + 1 || text[pos + w1.size()] != ' ') continue;
    const std::string candidate = std::string(w1) + " " + std::string(w2);
    if (mockgen::is_org_name(candidate) || mockgen::is_person_name(candidate)) found.emplace_back(pos, candidate);
  }
  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto& [pos, name] : found) {
    if (seen.insert(name).second) out.push_back(std::move(name));
  }
  return out;
}

std::string MockWorld::entity_url(std::string_view name, int index) {
  return "https://web.mock/entity/" + url_encode(name) + "/" + std::to_string(index);
}

std::string MockWorld::wiki_url(std::string_view name) { return "https://wiki.mock/wiki/" + url_encode(name); }

std::vector<SearchHit> MockWorld::search(std::string_view query, int num) const {
  std::vector<SearchHit> hits;
  const std::string q = text::casefold(query);
  for (const auto& o : search_overrides_) {
    const bool all = std::all_of(o.keywords.begin(), o.keywords.end(),
                                 [&](const std::string& k) { return text::contains(q, k); });
    if (all) {
      hits = o.hits;
      break;
    }
  }
  if (const NounInfo* noun = find_noun(query)) {
    for (int i = 1; i <= 10; ++i) {
      std::string link;
      if (i == 7) {
        link = "https://web.mock/dead/" + noun->slug + "/7";
      } else if (i == 9) {
        link = "https://web.mock/" + noun->slug + "/9.pdf";
      } else {
        link = "https://web.mock/" + noun->slug + "/" + std::to_string(i);
      }
      hits.push_back(SearchHit{capitalize(noun->noun) + " field notes, part " + std::to_string(i), link,
                               "Notes on " + noun->noun + " and the small groups and people connected to it.", 0});
    }
  }
  int entity_budget = 3;
  for (const auto& name : find_entities(query)) {
    if (entity_budget-- == 0) break;
    const auto p = profile(name);
    if (!p) continue;
    for (int i = 1; i <= 3; ++i) {
      const std::string& fact = p->facts[static_cast<std::size_t>(i - 1) % p->facts.size()];
      hits.push_back(SearchHit{name + " - notes (" + std::to_string(i) + ")", entity_url(name, i),
                               text::preview(fact, 160), 0});
    }
    hits.push_back(SearchHit{name + " - Wiki", wiki_url(name), text::preview(p->wiki_text, 160), 0});
  }
  // Like a real engine, pad thin result lists with loosely related pages.
  if (hits.size() < 10) {
    const std::string h = to_hex16(fnv1a64(q));
    for (int i = 1; hits.size() < 10; ++i) {
      hits.push_back(SearchHit{"Assorted notes " + std::to_string(i),
                               "https://web.mock/misc/" + h + "/" + std::to_string(i),
                               "A loosely related page collected for the query \"" + std::string(query) + "\".", 0});
    }
  }
  if (static_cast<int>(hits.size()) > num) hits.resize(static_cast<std::size_t>(std::max(num, 0)));
  for (std::size_t k = 0; k < hits.size(); ++k) hits[k].position = static_cast<int>(k) + 1;
  return hits;
}

std::string MockWorld::noun_page(const NounInfo& noun, int index) const {
  const std::uint64_t h = HashBuilder().add("noun-page").add(noun.slug).add(static_cast<std::uint64_t>(index)).value();
  const std::string title = capitalize(noun.noun) + " field notes, part " + std::to_string(index);
  std::string html = "<!DOCTYPE html>\n<html><head><title>" + html_escape(title) + "</title>\n<script>var tracker = \"" +
                     mockgen::org_name(mixk(h, 1)) + "\";</script>\n<style>p { margin: 0 }</style></head>\n<body>\n";
  html += "<nav><a href=\"/\">Home</a> | <a href=\"/about\">About us</a> | <a href=\"/login\">Log in</a></nav>\n";
  html += "<h1>" + html_escape(title) + "</h1>\n";
  html += para("This page collects notes about " + noun.noun + " gathered from small archives and local groups.");
  const std::size_t m = noun.entities.size();
  for (std::size_t k = 0; k < 3 && k < m; ++k) {
    const std::string& name = noun.entities[(static_cast<std::size_t>(index) + k) % m];
    const auto p = profile(name);
    if (!p) continue;
    if (p->language == Language::Zh) {
      html += para(text::join(p->facts, ""));
    } else {
      html += para(name + " is " + article(p->description) + " " + p->description + ". " +
                   p->facts[std::min<std::size_t>(1, p->facts.size() - 1)]);
    }
  }
  html += para("Several of these groups have shown their work in Paris at one time or another.");
  html += "<div>" + std::to_string(2000 + static_cast<int>(mixk(h, 2) % 24)) + "</div>\n";
  html += "<!-- layout: " + mockgen::org_name(mixk(h, 3)) + " -->\n";
  html += "<footer><a href=\"/privacy\">Privacy Policy</a> | Click here to subscribe | Read more</footer>\n";
  html += "</body></html>\n";
  return html;
}

std::string MockWorld::entity_page(const EntityProfile& p, int index) const {
  const std::uint64_t h = name_hash(p.name);
  std::string html = "<html><head><title>" + html_escape(p.name) + " - notes (" + std::to_string(index) +
                     ")</title><script>analytics('" + std::to_string(index) + "')</script></head>\n<body>\n<h1>" +
                     html_escape(p.name) + "</h1>\n";
  const bool zh = p.language == Language::Zh;
  std::vector<std::string> relation_lines;
  for (const auto& [target, rel] : p.relations) relation_lines.push_back(rel + (zh ? "。" : "."));
  if (index == 1) {
    for (const auto& f : p.facts) html += para(f);
    for (const auto& r : relation_lines) html += para(r);
  } else if (index == 2) {
    for (std::size_t k = 0; k < p.facts.size(); ++k) html += para(p.facts[(k + 1) % p.facts.size()]);
    if (!zh) {
      for (const auto& s : filler_sentences(p.name, mixk(h, 60), 4)) html += para(s);
    }
  } else {
    for (const auto& r : relation_lines) html += para(r);
    if (!zh) {
      for (const auto& s : filler_sentences(p.name, mixk(h, 61), 5)) html += para(s);
    }
  }
  html += "<footer>Privacy Policy | Back to top</footer>\n</body></html>\n";
  return html;
}

FetchedDocument MockWorld::fetch(std::string_view url) const {
  if (auto it = pages_.find(url); it != pages_.end()) return {200, it->second.content_type, it->second.html};
  const auto parts = parse_url(url);
  if (!parts) return {400, "text/plain", "bad url"};
  std::string_view target = parts->target;
  if (const auto q = target.find('?'); q != std::string_view::npos) target = target.substr(0, q);
  std::vector<std::string> seg;
  for (auto& s : text::split(target, '/')) {
    if (!s.empty()) seg.push_back(std::move(s));
  }
  const FetchedDocument not_found{404, "text/html", "<html><body><h1>Not Found</h1></body></html>"};
  if (parts->host == "wiki.mock") {
    if (seg.size() == 2 && seg[0] == "wiki") {
      if (auto article = wiki(url_decode(seg[1]))) {
        std::string html = "<html><body><h1>" + html_escape(article->title) + "</h1>\n";
        for (const auto& line : text::split_lines(article->text)) {
          if (!text::trim_view(line).empty()) html += para(line);
        }
        return {200, "text/html", html + "</body></html>\n"};
      }
    }
    return not_found;
  }
  if (parts->host != "web.mock" || seg.empty()) return not_found;
  if (seg[0] == "dead") return not_found;
  if (text::casefold(seg.back()).size() > 4 && text::casefold(seg.back()).rfind(".pdf") == seg.back().size() - 4) {
    return {200, "application/pdf", "%PDF-1.4\n% offline placeholder\n"};
  }
  if (seg[0] == "entity" && seg.size() == 3) {
    const auto index = parse_index(seg[2]);
    const auto p = profile(url_decode(seg[1]));
    if (!p || !index || *index < 1 || *index > 3) return not_found;
    return {200, "text/html; charset=utf-8", entity_page(*p, *index)};
  }
  if (seg[0] == "misc" && seg.size() == 3) {
    std::string html = "<html><body><h1>Assorted notes</h1>\n";
    html += para("This page gathers loosely related snippets without a clear subject.");
    html += para("Nothing here names a specific organization, person or date.");
    return {200, "text/html", html + "</body></html>\n"};
  }
  if (seg.size() == 2) {
    const NounInfo* noun = find_noun(seg[0]);
    const auto index = parse_index(seg[1]);
    if (noun && index && *index >= 1 && *index <= 10) return {200, "text/html; charset=utf-8", noun_page(*noun, *index)};
  }
  return not_found;
}

std::optional<WikiArticle> MockWorld::wiki(std::string_view name) const {
  const auto p = profile(text::trim_view(name));
  if (!p) return std::nullopt;
  return WikiArticle{p->name, p->wiki_text};
}

std::vector<std::string> MockWorld::answer_key(std::string_view url) const {
  auto it = pages_.find(url);
  return it == pages_.end() ? std::vector<std::string>{} : it->second.answer_key;
}

}  // namespace deepforge

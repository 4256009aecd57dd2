// SPDX-License-Identifier: Apache-2.0
#include "deepforge/expansion/expansion.hpp"

#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "deepforge/common/hash.hpp"
#include "deepforge/common/resources.hpp"
#include "deepforge/common/text.hpp"
#include "deepforge/datamodel/jsonl.hpp"
#include "deepforge/datamodel/serialize.hpp"
#include "deepforge/providers/errors.hpp"

namespace deepforge {

namespace embedded {
std::string_view high_frequency_list();
std::string_view default_stoplist();
}  // namespace embedded

using nlohmann::json;

namespace {

constexpr std::size_t kMaxPageChars = 12000;

std::set<std::string> parse_word_list(std::string_view text) {
  std::set<std::string> out;
  for (const auto& line : text::split_lines(text)) {
    const std::string_view t = text::trim_view(line);
    if (t.empty() || t[0] == '#') continue;
    out.insert(text::normalize_name(t));
  }
  return out;
}

/// Strips "1.", "12)", "-", "*", "•" list markers.
std::string strip_list_marker(std::string_view line) {
  std::string_view s = text::trim_view(line);
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) {
    s = text::trim_view(s.substr(i + 1));
  } else if (!s.empty() && (s[0] == '-' || s[0] == '*')) {
    s = text::trim_view(s.substr(1));
  } else if (s.rfind("•", 0) == 0) {
    s = text::trim_view(s.substr(3));
  }
  return std::string(s);
}

bool is_cancellation(const ProviderError& e) { return e.kind() == "Cancelled"; }

struct NounResult {
  std::vector<Entity> entities;
  std::size_t urls_visited = 0;
  std::size_t entities_raw = 0;
};

NounResult expand_noun(const ProviderSet& p, const Stage1Config& config, const std::string& noun,
                       const CancelToken* cancel) {
  NounResult out;
  std::vector<std::string> urls;
  try {
    urls = collect_seed_urls(*p.search, noun, config.top_k, cancel);
  } catch (const ProviderError& e) {
    if (is_cancellation(e)) throw;
    spdlog::warn("stage1: skipping noun '{}': {}", noun, e.what());
    return out;
  }
  for (const auto& url : urls) {
    std::string page;
    try {
      page = p.fetch->fetch_and_clean(url, cancel);
      ++out.urls_visited;
    } catch (const ProviderError& e) {
      if (is_cancellation(e)) throw;
      spdlog::info("stage1: {} skipped: {}", url, e.what());
      continue;
    } catch (const PreconditionError& e) {
      spdlog::info("stage1: {} skipped: {}", url, e.what());
      continue;
    }
    if (text::trim_view(page).empty()) continue;
    try {
      const std::uint64_t seed = HashBuilder().add(config.seed).add("extract").add(noun).add(url).value();
      auto found = extract_entities(*p.chat, page, noun, url, seed, p.models.stage, cancel);
      out.entities_raw += found.size();
      for (auto& e : drop_high_frequency(std::move(found), config.high_frequency)) {
        out.entities.push_back(std::move(e));
      }
    } catch (const ExpansionError& e) {
      spdlog::warn("stage1: extraction for {} skipped: {}", url, e.what());
    } catch (const ProviderError& e) {
      if (is_cancellation(e)) throw;
      spdlog::warn("stage1: extraction for {} skipped: {}", url, e.what());
    }
  }
  return out;
}

}  // namespace

std::set<std::string> default_stoplist() { return parse_word_list(embedded::default_stoplist()); }
std::set<std::string> high_frequency_list() { return parse_word_list(embedded::high_frequency_list()); }

std::set<std::string> load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read word list " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_word_list(ss.str());
}

std::vector<std::string> clean_noun_lines(std::string_view completion) {
  std::vector<std::string> out;
  for (const auto& line : text::split_lines(completion)) {
    std::string noun = text::collapse_whitespace(strip_list_marker(line));
    if (!noun.empty()) out.push_back(std::move(noun));
  }
  return out;
}

std::vector<std::string> generate_noun_batch(const ChatClient& chat, int batch_size,
                                             const std::set<std::string>& exclusion, std::uint64_t seed,
                                             const std::string& model, const CancelToken* cancel) {
  if (batch_size < 0) throw PreconditionError("batch size must be >= 0");
  if (batch_size == 0) return {};
  std::vector<std::string> excluded(exclusion.begin(), exclusion.end());
  ChatRequest req;
  req.messages.push_back(Message::user(fill_template(
      prompt_template("nouns"),
      {{"batch_size", std::to_string(batch_size)}, {"exclusion", excluded.empty() ? "(none)" : text::join(excluded, "\n")}})));
  req.purpose = "nouns";
  req.seed = seed;
  req.model = model;
  req.temperature = 1.0;
  req.hints = {{"batch_size", batch_size}, {"exclude", excluded}};
  const std::string completion = chat.chat(req, cancel).text;

  const auto lines = clean_noun_lines(completion);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& noun : lines) {
    const std::string key = text::normalize_name(noun);
    if (exclusion.count(key) || !seen.insert(key).second) continue;
    out.push_back(noun);
    if (static_cast<int>(out.size()) == batch_size) break;
  }
  if (out.empty()) {
    throw ExpansionError("DegenerateBatch", "all " + std::to_string(lines.size()) +
                                                " generated nouns were duplicates or already seen");
  }
  return out;
}

std::vector<std::string> collect_seed_urls(const SearchClient& search, const std::string& noun, int top_k,
                                           const CancelToken* cancel) {
  if (text::trim_view(noun).empty()) throw PreconditionError("noun must be non-empty");
  std::vector<std::string> out;
  if (top_k <= 0) return out;
  std::set<std::string> seen;
  for (const auto& hit : search.search_one(noun, cancel).hits) {
    if (!seen.insert(hit.link).second) continue;
    out.push_back(hit.link);
    if (static_cast<int>(out.size()) == top_k) break;
  }
  return out;
}

std::vector<Entity> parse_extraction(std::string_view completion, const std::string& origin,
                                     const std::string& source_url) {
  std::vector<Entity> out;
  std::size_t n = 0;
  for (const auto& raw : text::split_lines(completion)) {
    ++n;
    const std::string line = strip_list_marker(raw);
    if (line.empty()) continue;
    const auto bar = line.find('|');
    if (bar != std::string::npos && line.find('|', bar + 1) != std::string::npos) {
      throw ExpansionError("MalformedExtraction", "line " + std::to_string(n) + " has more than one '|'");
    }
    Entity e;
    e.name = text::collapse_whitespace(bar == std::string::npos ? line : line.substr(0, bar));
    if (e.name.empty()) throw ExpansionError("MalformedExtraction", "line " + std::to_string(n) + " has no name");
    if (bar != std::string::npos) {
      std::string d = text::collapse_whitespace(line.substr(bar + 1));
      if (!d.empty()) e.description = std::move(d);
    }
    e.origin_noun = origin;
    if (!source_url.empty()) e.source_url = source_url;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Entity> extract_entities(const ChatClient& chat, const std::string& page_text, const std::string& origin,
                                     const std::string& source_url, std::uint64_t seed, const std::string& model,
                                     const CancelToken* cancel) {
  if (text::trim_view(page_text).empty()) throw PreconditionError("page text must be non-empty");
  std::string page = page_text.size() > kMaxPageChars ? page_text.substr(0, kMaxPageChars) : page_text;
  ChatRequest req;
  req.messages.push_back(Message::user(
      fill_template(prompt_template("extract"), {{"noun", origin}, {"url", source_url}, {"page_text", page}})));
  req.purpose = "extract";
  req.seed = seed;
  req.model = model;
  req.hints = {{"page_text", page}};
  return parse_extraction(chat.chat(req, cancel).text, origin, source_url);
}

std::vector<Entity> drop_high_frequency(std::vector<Entity> entities, const std::set<std::string>& high_frequency) {
  std::erase_if(entities, [&](const Entity& e) { return high_frequency.count(text::normalize_name(e.name)) > 0; });
  return entities;
}

SeedEntitySet dedup_and_filter(const std::vector<Entity>& pool, const std::set<std::string>& stoplist) {
  SeedEntitySet out;
  std::set<std::string> seen;
  for (const auto& e : pool) {
    const std::string key = text::normalize_name(e.name);
    if (key.empty() || !seen.insert(key).second) continue;
    if (stoplist.count(key) || text::code_point_count(key) < 2 || text::is_purely_numeric(key)) continue;
    Entity kept = e;
    kept.name = text::collapse_whitespace(e.name);
    out.entities.push_back(std::move(kept));
  }
  out.stats.entities_raw = pool.size();
  out.stats.entities_kept = out.entities.size();
  return out;
}

SeedEntitySet run_stage1(const ProviderSet& p, const Stage1Config& config, const std::filesystem::path& batches_path,
                         const std::filesystem::path& out_path, const CancelToken* cancel) {
  if (config.workers < 1) throw PreconditionError("stage1 needs at least one worker");
  if (config.target_pool_size < 1) throw PreconditionError("target pool size must be >= 1");

  std::set<std::string> exclusion;
  std::vector<std::string> noun_pool;
  std::vector<Entity> pool;
  SeedStats stats;
  int consecutive_degenerate = 0;
  int batch = 0;

  auto absorb = [&](const json& row) {
    const bool degenerate = row.at("degenerate").get<bool>();
    consecutive_degenerate = degenerate ? consecutive_degenerate + 1 : 0;
    for (const auto& n : row.at("nouns")) {
      noun_pool.push_back(n.get<std::string>());
      exclusion.insert(text::normalize_name(noun_pool.back()));
    }
    for (const auto& e : row.at("entities")) pool.push_back(e.get<Entity>());
    stats.urls_visited += row.at("urls_visited").get<std::size_t>();
    stats.entities_raw += row.at("entities_raw").get<std::size_t>();
    ++batch;
  };

  if (std::filesystem::exists(batches_path)) {
    recover_jsonl(batches_path);
    for (const auto& row : read_json_lines(batches_path)) absorb(row);
    if (batch > 0) spdlog::info("stage1: resuming after {} persisted batches", batch);
  }
  JsonlAppender appender(batches_path);

  while (true) {
    const std::size_t current = dedup_and_filter(pool, config.stoplist).entities.size();
    if (current >= config.target_pool_size) break;
    if (consecutive_degenerate >= 2) {
      spdlog::warn("stage1: noun generation saturated; stopping with {} entities", current);
      break;
    }
    if (batch >= config.max_batches) {
      spdlog::warn("stage1: reached max_batches={} with {} entities", config.max_batches, current);
      break;
    }
    json row = {{"batch", batch}, {"nouns", json::array()}, {"entities", json::array()},
                {"urls_visited", 0},  {"entities_raw", 0},    {"degenerate", false}};
    std::vector<std::string> nouns;
    try {
      nouns = generate_noun_batch(*p.chat, config.batch_size, exclusion,
                                  derive_seed(config.seed, "nouns:" + std::to_string(batch)), p.models.stage, cancel);
    } catch (const ExpansionError& e) {
      spdlog::warn("stage1: batch {} degenerate: {}", batch, e.what());
      row["degenerate"] = true;
    }
    row["nouns"] = nouns;
    std::size_t urls = 0;
    std::size_t raw = 0;
    run_ordered<NounResult>(
        nouns.size(), config.workers, [&](std::size_t i) { return expand_noun(p, config, nouns[i], cancel); },
        [&](std::size_t, ItemResult<NounResult>&& r) {
          if (!r.ok()) std::rethrow_exception(r.error);
          urls += r.value->urls_visited;
          raw += r.value->entities_raw;
          for (auto& e : r.value->entities) row["entities"].push_back(e);
        },
        cancel);
    if (cancel && cancel->cancelled()) throw ProviderError("Cancelled", "stage1 interrupted in batch " + std::to_string(batch));
    row["urls_visited"] = urls;
    row["entities_raw"] = raw;
    appender.append(row);
    absorb(row);
  }

  SeedEntitySet result = dedup_and_filter(pool, config.stoplist);
  result.noun_pool = noun_pool;
  result.stats.nouns_generated = noun_pool.size();
  result.stats.urls_visited = stats.urls_visited;
  result.stats.entities_raw = stats.entities_raw;
  write_records(out_path, result.entities);
  return result;
}

}  // namespace deepforge

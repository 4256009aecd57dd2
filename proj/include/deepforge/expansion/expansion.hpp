// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "deepforge/common/error.hpp"
#include "deepforge/common/worker_pool.hpp"
#include "deepforge/datamodel/types.hpp"
#include "deepforge/providers/provider_set.hpp"

namespace deepforge {

/// Kinds: DegenerateBatch, MalformedExtraction.
class ExpansionError : public Error {
 public:
  ExpansionError(std::string kind, const std::string& detail) : Error(std::move(kind), detail) {}
};

struct SeedStats {
  std::size_t nouns_generated = 0;
  std::size_t urls_visited = 0;
  std::size_t entities_raw = 0;
  std::size_t entities_kept = 0;

  friend bool operator==(const SeedStats&, const SeedStats&) = default;
};

struct SeedEntitySet {
  std::vector<Entity> entities;
  std::vector<std::string> noun_pool;
  SeedStats stats;

  friend bool operator==(const SeedEntitySet&, const SeedEntitySet&) = default;
};

/// Normalized word lists. The defaults are compiled in from data/.
std::set<std::string> default_stoplist();
std::set<std::string> high_frequency_list();
std::set<std::string> load_word_list(const std::filesystem::path& path);

/// One noun per non-blank line with list numbering ("1.", "2)") and bullets
/// removed.
std::vector<std::string> clean_noun_lines(std::string_view completion);

/// At most `batch_size` new nouns. `exclusion` holds normalized names.
/// Throws DegenerateBatch when the completion had lines but none survived.
std::vector<std::string> generate_noun_batch(const ChatClient& chat, int batch_size,
                                             const std::set<std::string>& exclusion, std::uint64_t seed,
                                             const std::string& model = {}, const CancelToken* cancel = nullptr);

/// First `top_k` distinct hit links, in hit order.
std::vector<std::string> collect_seed_urls(const SearchClient& search, const std::string& noun, int top_k,
                                           const CancelToken* cancel = nullptr);

/// Parses "name" or "name | description" lines (bullets and numbering
/// allowed). Throws MalformedExtraction for lines with an empty name or more
/// than one separator.
std::vector<Entity> parse_extraction(std::string_view completion, const std::string& origin,
                                     const std::string& source_url);

std::vector<Entity> extract_entities(const ChatClient& chat, const std::string& page_text, const std::string& origin,
                                     const std::string& source_url, std::uint64_t seed,
                                     const std::string& model = {}, const CancelToken* cancel = nullptr);

/// Removes entities whose normalized name is a common, high-frequency word.
std::vector<Entity> drop_high_frequency(std::vector<Entity> entities, const std::set<std::string>& high_frequency);

/// First occurrence wins under normalize_name; drops stoplisted, shorter
/// than two characters, and purely numeric names.
SeedEntitySet dedup_and_filter(const std::vector<Entity>& pool, const std::set<std::string>& stoplist);

struct Stage1Config {
  int batch_size = 8;
  std::size_t workers = 1;
  std::size_t target_pool_size = 100;
  int top_k = 10;
  int max_batches = 50;
  std::set<std::string> stoplist = default_stoplist();
  std::set<std::string> high_frequency = high_frequency_list();
  std::uint64_t seed = 0;
};

/// Batches of generate, search, fetch and extract until the deduplicated
/// pool reaches the target, the saturation rule fires (two consecutive
/// degenerate batches) or max_batches is hit. Each finished batch is
/// appended to `batches_path`; a rerun replays those and continues, so an
/// interrupted run finishes with the same result. The final set is written
/// to `out_path`.
SeedEntitySet run_stage1(const ProviderSet& providers, const Stage1Config& config,
                         const std::filesystem::path& batches_path, const std::filesystem::path& out_path,
                         const CancelToken* cancel = nullptr);

}  // namespace deepforge

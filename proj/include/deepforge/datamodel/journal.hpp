// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepforge/datamodel/jsonl.hpp"

namespace deepforge {

/// Crash-safe, ordered output for a stage that maps input items to zero or
/// more output rows. For every finished item the output rows are appended
/// first, then one progress row {index, key, status, emitted, detail}. On
/// open, a torn tail is dropped and output rows that have no progress row
/// yet are cut, so a rerun restarts exactly at the first unfinished item.
class StageJournal {
 public:
  StageJournal(std::filesystem::path output, std::filesystem::path progress);

  /// Number of finished items (the next index to process).
  std::size_t completed() const noexcept { return completed_; }
  /// Keys of finished items, in order.
  const std::vector<std::string>& keys() const noexcept { return keys_; }

  void record(const std::string& key, const std::vector<nlohmann::json>& rows, const std::string& status,
              const std::string& detail = {});

  static std::filesystem::path progress_path_for(const std::filesystem::path& output);

 private:
  std::filesystem::path output_;
  std::filesystem::path progress_;
  std::size_t completed_ = 0;
  std::vector<std::string> keys_;
  std::optional<JsonlAppender> out_;
  std::optional<JsonlAppender> log_;
};

}  // namespace deepforge

// SPDX-License-Identifier: Apache-2.0
#include "deepforge/datamodel/journal.hpp"

namespace deepforge {

using nlohmann::json;

StageJournal::StageJournal(std::filesystem::path output, std::filesystem::path progress)
    : output_(std::move(output)), progress_(std::move(progress)) {
  std::size_t expected = 0;
  if (std::filesystem::exists(progress_)) {
    recover_jsonl(progress_);
    for (const auto& row : read_json_lines(progress_)) {
      expected += row.at("emitted").get<std::size_t>();
      keys_.push_back(row.at("key").get<std::string>());
    }
  }
  completed_ = keys_.size();
  if (std::filesystem::exists(output_)) {
    recover_jsonl(output_);
    auto rows = read_json_lines(output_);
    if (rows.size() > expected) {
      rows.resize(expected);
      write_json_lines(output_, rows);
    } else if (rows.size() < expected) {
      throw PersistenceError("SchemaMismatch", output_.string() + " has fewer rows than its progress log records");
    }
  } else if (expected > 0) {
    throw PersistenceError("IoFailure", output_.string() + " is missing but its progress log is not empty");
  }
  out_.emplace(output_);
  log_.emplace(progress_);
}

void StageJournal::record(const std::string& key, const std::vector<json>& rows, const std::string& status,
                          const std::string& detail) {
  for (const auto& r : rows) out_->append(r);
  json row = {{"index", completed_}, {"key", key}, {"status", status}, {"emitted", rows.size()}};
  if (!detail.empty()) row["detail"] = detail;
  log_->append(row);
  keys_.push_back(key);
  ++completed_;
}

std::filesystem::path StageJournal::progress_path_for(const std::filesystem::path& output) {
  auto p = output;
  p += ".progress";
  return p;
}

}  // namespace deepforge

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepforge/common/error.hpp"

namespace deepforge {

/// IoFailure or SchemaMismatch; `line()` is 1-based (0 when not line-bound).
class PersistenceError : public Error {
 public:
  PersistenceError(std::string kind, const std::string& detail, std::size_t line = 0)
      : Error(std::move(kind), line ? detail + " (line " + std::to_string(line) + ")" : detail), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Compact single-line JSON; invalid UTF-8 is replaced rather than thrown.
std::string dump_line(const nlohmann::json& j);

std::vector<nlohmann::json> read_json_lines(const std::filesystem::path& path);

/// Writes via a temporary file and rename, so readers never see half a file.
void write_json_lines(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);

/// Drops a trailing line that has no terminating newline (a torn append) and
/// returns the number of complete lines left.
std::size_t recover_jsonl(const std::filesystem::path& path);

/// Number of non-blank lines; 0 if the file does not exist.
std::size_t count_records(const std::filesystem::path& path);

/// Single-owner appender. Every append is one full line, flushed immediately.
class JsonlAppender {
 public:
  explicit JsonlAppender(const std::filesystem::path& path, bool truncate = false);

  void append(const nlohmann::json& row);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

template <class T>
void write_records(const std::filesystem::path& path, std::span<const T> records) {
  std::vector<nlohmann::json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.emplace_back(r);
  write_json_lines(path, rows);
}

template <class T>
void write_records(const std::filesystem::path& path, const std::vector<T>& records) {
  write_records(path, std::span<const T>(records));
}

template <class T>
std::vector<T> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistenceError("IoFailure", "cannot open " + path.string());
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line).template get<T>());
    } catch (const nlohmann::json::exception& e) {
      throw PersistenceError("SchemaMismatch", path.string() + ": " + e.what(), line_no);
    } catch (const Error& e) {
      throw PersistenceError("SchemaMismatch", path.string() + ": " + e.what(), line_no);
    }
  }
  if (in.bad()) throw PersistenceError("IoFailure", "read error on " + path.string());
  return out;
}

}  // namespace deepforge

// SPDX-License-Identifier: Apache-2.0
#include "deepforge/datamodel/jsonl.hpp"

#include <system_error>

namespace deepforge {

namespace fs = std::filesystem;
using nlohmann::json;

std::string dump_line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

std::vector<json> read_json_lines(const fs::path& path) { return read_records<json>(path); }

void write_json_lines(const fs::path& path, const std::vector<json>& rows) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw PersistenceError("IoFailure", "cannot write " + tmp.string());
    for (const auto& row : rows) out << dump_line(row) << '\n';
    out.flush();
    if (!out) throw PersistenceError("IoFailure", "write error on " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw PersistenceError("IoFailure", "cannot rename " + tmp.string() + ": " + ec.message());
}

std::size_t recover_jsonl(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) return 0;
  std::string content;
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PersistenceError("IoFailure", "cannot open " + path.string());
    content.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  if (!content.empty() && content.back() != '\n') {
    const auto last_nl = content.rfind('\n');
    const std::size_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
    fs::resize_file(path, keep, ec);
    if (ec) throw PersistenceError("IoFailure", "cannot truncate " + path.string() + ": " + ec.message());
    content.resize(keep);
  }
  return count_records(path);
}

std::size_t count_records(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return 0;
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) ++n;
  }
  return n;
}

JsonlAppender::JsonlAppender(const fs::path& path, bool truncate) : path_(path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  out_.open(path, std::ios::binary | (truncate ? std::ios::trunc : std::ios::app));
  if (!out_) throw PersistenceError("IoFailure", "cannot open " + path.string() + " for append");
}

void JsonlAppender::append(const json& row) {
  out_ << dump_line(row) << '\n';
  out_.flush();
  if (!out_) throw PersistenceError("IoFailure", "append failed on " + path_.string());
}

}  // namespace deepforge

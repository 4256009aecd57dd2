// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deepforge/common/error.hpp"

namespace deepforge {

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& detail) : Error("ConfigError", detail) {}
};

/// Flat `key = value` configuration. One entry per line, `#` starts a
/// comment, keys are dotted (stage1.batch_size). Later lines override earlier
/// ones. Getters throw ConfigError for missing or ill-typed values.
class Config {
 public:
  static Config parse(std::string_view text, const std::string& origin = "<string>");
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Throws ConfigError naming every missing key at once.
  void require(const std::vector<std::string>& keys) const;

  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

  /// Canonical text form (sorted keys); used for run manifests.
  std::string dump() const;

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace deepforge

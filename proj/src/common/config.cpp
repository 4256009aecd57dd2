// SPDX-License-Identifier: Apache-2.0
#include "deepforge/common/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "deepforge/common/text.hpp"

namespace deepforge {

namespace {

template <class T>
std::optional<T> parse_number(std::string_view s) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

Config Config::parse(std::string_view text, const std::string& origin) {
  Config c;
  std::size_t n = 0;
  for (const auto& raw : text::split_lines(text)) {
    ++n;
    std::string_view line = text::trim_view(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(origin + ":" + std::to_string(n) + ": expected key = value");
    }
    std::string key = text::trim(line.substr(0, eq));
    std::string value = text::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(n) + ": empty key");
    c.entries_[std::move(key)] = std::move(value);
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void Config::set(const std::string& key, std::string value) { entries_[key] = std::move(value); }

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string Config::get_string(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

std::int64_t Config::get_int(const std::string& key) const {
  const std::string v = get_string(key);
  if (auto n = parse_number<std::int64_t>(v)) return *n;
  throw ConfigError("key '" + key + "' expects an integer, got '" + v + "'");
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  if (auto n = parse_number<std::uint64_t>(v)) return *n;
  throw ConfigError("key '" + key + "' expects an unsigned integer, got '" + v + "'");
}

double Config::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  if (auto d = parse_number<double>(v)) return *d;
  throw ConfigError("key '" + key + "' expects a number, got '" + v + "'");
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = text::casefold(get_string(key));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "' expects a boolean, got '" + v + "'");
}

void Config::require(const std::vector<std::string>& keys) const {
  std::vector<std::string> missing;
  for (const auto& k : keys) {
    if (!has(k)) missing.push_back(k);
  }
  if (!missing.empty()) throw ConfigError("missing required keys: " + text::join(missing, ", "));
}

std::string Config::dump() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace deepforge

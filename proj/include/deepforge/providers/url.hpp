// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace deepforge {

struct UrlParts {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;        // 0 when not given
  std::string target;  // path plus query, at least "/"

  /// "scheme://host[:port]".
  std::string origin() const;
};

/// Accepts absolute http(s) URLs with a non-empty host and no whitespace or
/// control characters.
std::optional<UrlParts> parse_url(std::string_view url);
bool is_valid_url(std::string_view url);

/// Percent-encoding for query components and path segments (RFC 3986
/// unreserved characters pass through).
std::string url_encode(std::string_view s);
std::string url_decode(std::string_view s);

}  // namespace deepforge

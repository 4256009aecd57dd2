// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "deepforge/providers/call_guard.hpp"

namespace deepforge {

struct FetchedDocument {
  int status = 200;
  std::string content_type;  // media type, parameters allowed
  std::string body;
};

class FetchBackend {
 public:
  virtual ~FetchBackend() = default;
  virtual FetchedDocument fetch(const std::string& url) = 0;
};

/// Visible text of an HTML document: script, style, noscript, head, template
/// and comments are dropped, entities decoded, block elements become line
/// breaks, whitespace is collapsed and blank lines removed.
std::string html_to_text(std::string_view html);

/// Lower-cased media type without parameters.
std::string media_type(std::string_view content_type);

/// Fetch plus cleaning; the ledger counts this provider as "fetch".
class PageFetcher {
 public:
  PageFetcher(std::shared_ptr<FetchBackend> backend, std::shared_ptr<CallGuard> guard);

  /// HTML is converted with html_to_text, text/plain is whitespace-normalized,
  /// anything else raises NonHtmlContent. Non-2xx status raises FetchFailure
  /// (5xx and 429 are retried first).
  std::string fetch_and_clean(const std::string& url, const CancelToken* cancel = nullptr) const;

 private:
  std::shared_ptr<FetchBackend> backend_;
  std::shared_ptr<CallGuard> guard_;
};

}  // namespace deepforge

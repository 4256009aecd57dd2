// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "deepforge/common/error.hpp"

namespace deepforge {

/// Failure reported by an external dependency. Transient failures are retried
/// by CallGuard; everything else surfaces unchanged.
///
/// Kinds: ProviderUnavailable, ContextOverflow, EmptyQuery, FetchFailure,
/// NonHtmlContent, SandboxUnavailable, Cancelled.
class ProviderError : public Error {
 public:
  ProviderError(std::string kind, const std::string& detail, bool transient = false)
      : Error(std::move(kind), detail), transient_(transient) {}
  ProviderError(std::string kind, const std::string& label, const std::string& detail, bool transient)
      : Error(std::move(kind), label, detail), transient_(transient) {}

  bool transient() const noexcept { return transient_; }

 private:
  bool transient_;
};

/// HTTP-level fetch failure; the message reads "FetchFailure(<status>): <url>".
class FetchFailure : public ProviderError {
 public:
  FetchFailure(int status, const std::string& url)
      : ProviderError("FetchFailure", "FetchFailure(" + std::to_string(status) + ")", url, status >= 500 || status == 429),
        status_(status) {}

  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace deepforge

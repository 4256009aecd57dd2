// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace deepforge {

/// Base class for every failure the library raises. `kind()` is a stable,
/// machine-readable identifier (e.g. "UnclosedTag", "ProviderUnavailable").
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& detail)
      : std::runtime_error(kind + ": " + detail), kind_(std::move(kind)) {}

  /// Same kind, but the message starts with `label` (e.g. "FetchFailure(503)").
  Error(std::string kind, const std::string& label, const std::string& detail)
      : std::runtime_error(label + ": " + detail), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Raised when a documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& detail) : Error("PreconditionFailed", detail) {}
};

}  // namespace deepforge

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepforge/providers/call_guard.hpp"

namespace deepforge {

struct ExecLimits {
  double wall_seconds = 10.0;
  std::size_t output_bytes = 64 * 1024;
};

enum class ExecExit { Ok, Error, Timeout };

struct ExecResult {
  std::string stdout_text;
  std::string stderr_text;
  ExecExit exit = ExecExit::Ok;
  int exit_code = 0;
  bool truncated = false;
};

std::string to_string(ExecExit e);
void to_json(nlohmann::json& j, const ExecResult& r);

/// Appended to a stream cut at `limit` bytes.
std::string truncation_marker(std::size_t limit);

class SandboxBackend {
 public:
  virtual ~SandboxBackend() = default;
  virtual ExecResult execute(const std::string& code, const ExecLimits& limits) = 0;
};

struct SubprocessOptions {
  std::string interpreter = "python3";  // bare name (PATH lookup) or absolute path
  std::vector<std::string> allowlist = {"python3", "python"};
  /// Fail with SandboxUnavailable instead of running without a private
  /// network namespace.
  bool require_isolation = true;
  std::size_t memory_mb = 1024;
  std::size_t max_file_mb = 64;
};

/// Runs code with an allowlisted interpreter in a fresh temporary directory,
/// inside new user and network namespaces, under rlimits and a wall clock
/// enforced by killing the whole process group.
class SubprocessSandbox : public SandboxBackend {
 public:
  explicit SubprocessSandbox(SubprocessOptions options = {});
  ExecResult execute(const std::string& code, const ExecLimits& limits) override;

  /// Absolute path of the interpreter or SandboxUnavailable.
  std::string resolve_interpreter() const;

 private:
  SubprocessOptions options_;
};

/// Offline stand-in that understands assignments and print() over integer and
/// float arithmetic, formatting results the way Python does.
class MockSandbox : public SandboxBackend {
 public:
  ExecResult execute(const std::string& code, const ExecLimits& limits) override;
};

/// Guarded sandbox access; the ledger counts this provider as "sandbox".
class CodeSandbox {
 public:
  CodeSandbox(std::shared_ptr<SandboxBackend> backend, std::shared_ptr<CallGuard> guard);

  /// Preconditions: wall_seconds > 0 and output_bytes > 0.
  ExecResult execute_code(const std::string& code, const ExecLimits& limits, const CancelToken* cancel = nullptr) const;

 private:
  std::shared_ptr<SandboxBackend> backend_;
  std::shared_ptr<CallGuard> guard_;
};

}  // namespace deepforge

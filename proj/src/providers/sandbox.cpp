// SPDX-License-Identifier: Apache-2.0
#include "deepforge/providers/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "deepforge/common/text.hpp"

namespace deepforge {

namespace fs = std::filesystem;

std::string to_string(ExecExit e) {
  switch (e) {
    case ExecExit::Ok: return "ok";
    case ExecExit::Error: return "error";
    case ExecExit::Timeout: return "timeout";
  }
  return "error";
}

void to_json(nlohmann::json& j, const ExecResult& r) {
  j = nlohmann::json{{"stdout", r.stdout_text}, {"stderr", r.stderr_text}, {"exit", to_string(r.exit)}};
  if (r.truncated) j["truncated"] = true;
}

std::string truncation_marker(std::size_t limit) {
  return "\n[output truncated at " + std::to_string(limit) + " bytes]";
}

namespace {

struct Fd {
  int fd = -1;
  Fd() = default;
  explicit Fd(int f) : fd(f) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }
  void reset() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

bool make_pipe(Fd& read_end, Fd& write_end) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) return false;
  read_end.fd = fds[0];
  write_end.fd = fds[1];
  return true;
}

[[noreturn]] void child_fail(int report_fd, int stage) {
  const int payload[2] = {stage, errno};
  [[maybe_unused]] auto n = ::write(report_fd, payload, sizeof payload);
  ::_exit(127);
}

void set_limit(int resource, rlim_t value) {
  struct rlimit rl{value, value};
  ::setrlimit(resource, &rl);
}

bool allowlisted(const std::string& path, const std::vector<std::string>& allowlist) {
  const std::string base = fs::path(path).filename().string();
  return std::find(allowlist.begin(), allowlist.end(), base) != allowlist.end();
}

}  // namespace

SubprocessSandbox::SubprocessSandbox(SubprocessOptions options) : options_(std::move(options)) {}

std::string SubprocessSandbox::resolve_interpreter() const {
  if (!allowlisted(options_.interpreter, options_.allowlist)) {
    throw ProviderError("SandboxUnavailable", "interpreter '" + options_.interpreter + "' is not allowlisted");
  }
  auto executable = [](const fs::path& p) { return ::access(p.c_str(), X_OK) == 0 && fs::is_regular_file(p); };
  if (options_.interpreter.find('/') != std::string::npos) {
    if (executable(options_.interpreter)) return options_.interpreter;
  } else if (const char* path = std::getenv("PATH")) {
    for (const auto& dir : text::split(path, ':')) {
      if (dir.empty()) continue;
      const fs::path candidate = fs::path(dir) / options_.interpreter;
      if (executable(candidate)) return candidate.string();
    }
  }
  throw ProviderError("SandboxUnavailable", "interpreter '" + options_.interpreter + "' not found");
}

ExecResult SubprocessSandbox::execute(const std::string& code, const ExecLimits& limits) {
  const std::string interpreter = resolve_interpreter();

  std::string dir_template = (fs::temp_directory_path() / "df-sandbox-XXXXXX").string();
  if (!::mkdtemp(dir_template.data())) {
    throw ProviderError("SandboxUnavailable", std::string("cannot create jail directory: ") + std::strerror(errno));
  }
  const fs::path jail = dir_template;
  struct Cleanup {
    fs::path dir;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
  } cleanup{jail};
  {
    std::ofstream script(jail / "main.py", std::ios::binary);
    script << code;
    if (!script) throw ProviderError("SandboxUnavailable", "cannot write script into jail");
  }

  Fd out_r, out_w, err_r, err_w, rep_r, rep_w;
  if (!make_pipe(out_r, out_w) || !make_pipe(err_r, err_w) || !make_pipe(rep_r, rep_w)) {
    throw ProviderError("SandboxUnavailable", std::string("pipe failed: ") + std::strerror(errno));
  }

  // Everything the child needs is prepared before fork; after fork only
  // async-signal-safe calls are made.
  const std::string jail_str = jail.string();
  const std::string home = "HOME=" + jail_str;
  std::vector<std::string> env_strings = {"PATH=/usr/local/bin:/usr/bin:/bin", home, "LANG=C.UTF-8",
                                          "PYTHONDONTWRITEBYTECODE=1", "PYTHONIOENCODING=utf-8"};
  std::vector<char*> envp;
  for (auto& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);
  std::string arg0 = interpreter, arg1 = "-I", arg2 = "main.py";
  char* argv[] = {arg0.data(), arg1.data(), arg2.data(), nullptr};
  const rlim_t cpu_seconds = static_cast<rlim_t>(std::ceil(limits.wall_seconds)) + 1;
  const rlim_t memory = static_cast<rlim_t>(options_.memory_mb) << 20;
  const rlim_t file_size = static_cast<rlim_t>(options_.max_file_mb) << 20;
  const bool require_isolation = options_.require_isolation;

  const pid_t pid = ::fork();
  if (pid < 0) throw ProviderError("SandboxUnavailable", std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    if (::unshare(CLONE_NEWUSER | CLONE_NEWNET) != 0 && require_isolation) child_fail(rep_w.fd, 1);
    if (::chdir(jail_str.c_str()) != 0) child_fail(rep_w.fd, 2);
    const int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull < 0 || ::dup2(devnull, 0) < 0 || ::dup2(out_w.fd, 1) < 0 || ::dup2(err_w.fd, 2) < 0) {
      child_fail(rep_w.fd, 3);
    }
    set_limit(RLIMIT_CPU, cpu_seconds);
    set_limit(RLIMIT_AS, memory);
    set_limit(RLIMIT_FSIZE, file_size);
    set_limit(RLIMIT_CORE, 0);
    ::execve(argv[0], argv, envp.data());
    child_fail(rep_w.fd, 4);
  }

  out_w.reset();
  err_w.reset();
  rep_w.reset();

  int report[2] = {0, 0};
  ssize_t got;
  do {
    got = ::read(rep_r.fd, report, sizeof report);
  } while (got < 0 && errno == EINTR);
  if (got > 0) {
    int status;
    ::waitpid(pid, &status, 0);
    static constexpr const char* kStage[] = {"", "network isolation (unshare)", "chdir into jail", "stdio setup",
                                             "exec"};
    const int stage = std::clamp(report[0], 0, 4);
    throw ProviderError("SandboxUnavailable",
                        std::string(kStage[stage]) + " failed: " + std::strerror(report[1]));
  }

  ExecResult result;
  const auto deadline = SteadyClock::now() + std::chrono::duration_cast<SteadyClock::duration>(
                                                 std::chrono::duration<double>(limits.wall_seconds));
  bool timed_out = false;
  bool out_truncated = false;
  bool err_truncated = false;
  pollfd fds[2] = {{out_r.fd, POLLIN, 0}, {err_r.fd, POLLIN, 0}};
  int open_streams = 2;
  char buf[16384];
  while (open_streams > 0) {
    const auto now = SteadyClock::now();
    if (now >= deadline) {
      timed_out = true;
      break;
    }
    const auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
    const int ready = ::poll(fds, 2, static_cast<int>(std::min<long long>(wait_ms, 1000)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (int k = 0; k < 2; ++k) {
      if (fds[k].fd < 0 || !(fds[k].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      const ssize_t n = ::read(fds[k].fd, buf, sizeof buf);
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        fds[k].fd = -1;
        --open_streams;
        continue;
      }
      std::string& sink = k == 0 ? result.stdout_text : result.stderr_text;
      bool& cut = k == 0 ? out_truncated : err_truncated;
      const std::size_t room = limits.output_bytes > sink.size() ? limits.output_bytes - sink.size() : 0;
      sink.append(buf, std::min<std::size_t>(room, static_cast<std::size_t>(n)));
      if (static_cast<std::size_t>(n) > room) cut = true;
    }
  }
  if (timed_out) ::kill(-pid, SIGKILL);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  ::kill(-pid, SIGKILL);  // stragglers that inherited the group

  if (out_truncated) result.stdout_text += truncation_marker(limits.output_bytes);
  if (err_truncated) result.stderr_text += truncation_marker(limits.output_bytes);
  result.truncated = out_truncated || err_truncated;
  if (timed_out) {
    result.exit = ExecExit::Timeout;
    result.exit_code = -1;
  } else if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
    result.exit = result.exit_code == 0 ? ExecExit::Ok : ExecExit::Error;
  } else {
    result.exit_code = WIFSIGNALED(status) ? 128 + WTERMSIG(status) : -1;
    result.exit = WIFSIGNALED(status) && WTERMSIG(status) == SIGXCPU ? ExecExit::Timeout : ExecExit::Error;
  }
  return result;
}

CodeSandbox::CodeSandbox(std::shared_ptr<SandboxBackend> backend, std::shared_ptr<CallGuard> guard)
    : backend_(std::move(backend)), guard_(std::move(guard)) {}

ExecResult CodeSandbox::execute_code(const std::string& code, const ExecLimits& limits, const CancelToken* cancel) const {
  if (!(limits.wall_seconds > 0) || limits.output_bytes == 0) {
    throw PreconditionError("execution limits must be positive");
  }
  return guard_->run([&] { return backend_->execute(code, limits); }, cancel);
}

}  // namespace deepforge

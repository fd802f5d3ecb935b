// Copyright 2026 The Phase Warden Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "phase_warden/shell.h"

#include <fcntl.h>
#include <sys/ptrace.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "phase_warden/error.h"

extern char** environ;

namespace phase_warden {
namespace {

// Builtins with a same-named program on the search path.
constexpr const char* kShadowingBuiltins = "true false echo printf test [ pwd";

void WriteAll(int fd, std::string_view s) {
  while (!s.empty()) {
    ssize_t n = ::write(fd, s.data(), s.size());
    if (n <= 0) return;
    s.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

ExitInfo DecodeWaitStatus(int status) {
  if (WIFEXITED(status)) return {WEXITSTATUS(status), 0};
  if (WIFSIGNALED(status)) return {128 + WTERMSIG(status), WTERMSIG(status)};
  return {255, 0};
}

EnvMap CurrentEnvironment() {
  EnvMap env;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    std::string_view kv = *e;
    std::size_t eq = kv.find('=');
    if (eq == std::string_view::npos || eq == 0) continue;
    env.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  return env;
}

std::vector<std::string> EnvToStrings(const EnvMap& env) {
  std::vector<std::string> out;
  out.reserve(env.size());
  for (const auto& [k, v] : env) out.push_back(k + "=" + v);
  return out;
}

std::optional<std::filesystem::path> FindProgram(std::string_view name,
                                                 std::string_view search_path) {
  std::size_t start = 0;
  while (start <= search_path.size()) {
    std::size_t colon = search_path.find(':', start);
    if (colon == std::string_view::npos) colon = search_path.size();
    std::string dir(search_path.substr(start, colon - start));
    if (dir.empty()) dir = ".";
    std::filesystem::path candidate = std::filesystem::path(dir) / name;
    struct stat st {};
    if (::stat(candidate.c_str(), &st) == 0 && S_ISREG(st.st_mode) &&
        ::access(candidate.c_str(), X_OK) == 0) {
      return candidate;
    }
    start = colon + 1;
  }
  return std::nullopt;
}

const std::filesystem::path& ShellPath() {
  static const std::filesystem::path path = [] {
    for (const char* p : {"/bin/bash", "/usr/bin/bash", "/usr/local/bin/bash"}) {
      if (::access(p, X_OK) == 0) return std::filesystem::path(p);
    }
    const char* search = std::getenv("PATH");
    if (search) {
      if (auto found = FindProgram("bash", search)) return *found;
    }
    return std::filesystem::path();
  }();
  if (path.empty()) throw RunError("bash is required to run phase commands");
  return path;
}

std::string ShellQuote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += "'";
  return out;
}

std::string BuildPhaseScript(std::string_view command,
                             const PhaseScriptOptions& options) {
  std::string script;
  if (options.env_before || options.env_after) {
    script +=
        "__pw_dump_env() { enable printf; local IFS=$' \\t\\n' __pw_n; "
        "for __pw_n in $(compgen -e); do "
        "printf '%s=%s\\0' \"$__pw_n\" \"${!__pw_n}\"; done; }\n";
  }
  if (options.env_before) {
    script += "__pw_dump_env > " + ShellQuote(options.env_before->string()) +
              "\n";
  }
  if (options.env_after) {
    std::string trap_body = "__pw_rc=$?; __pw_dump_env > " +
                            ShellQuote(options.env_after->string()) +
                            "; exit $__pw_rc";
    script += "trap " + ShellQuote(trap_body) + " EXIT\n";
  }
  if (options.expose_builtins) {
    script += std::string("enable -n ") + kShadowingBuiltins + "\n";
  }
  script += command;
  script += "\n";
  return script;
}

pid_t SpawnShell(const ShellCommand& command, bool traced) {
  const std::filesystem::path& bash = ShellPath();
  std::vector<std::string> env_strings = EnvToStrings(command.env);
  std::vector<char*> envp;
  for (std::string& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);
  std::string arg0 = "bash", arg1 = "-c", arg2 = command.script;
  char* argv[] = {arg0.data(), arg1.data(), arg2.data(), nullptr};

  const std::string out_path = command.stdout_path.string();
  const std::string err_path = command.stderr_path.string();
  const std::string cwd = command.cwd.string();

  pid_t pid = ::fork();
  if (pid < 0) {
    throw RunError(std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    int in = ::open("/dev/null", O_RDONLY);
    int out = ::open(out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    int err = ::open(err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (in < 0 || out < 0 || err < 0) _exit(126);
    ::dup2(in, STDIN_FILENO);
    ::dup2(out, STDOUT_FILENO);
    ::dup2(err, STDERR_FILENO);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) {
      std::string msg = "phase-warden: cannot enter '" + cwd +
                        "': " + std::strerror(errno) + "\n";
      WriteAll(STDERR_FILENO, msg);
      _exit(127);
    }
    if (traced) {
      if (::ptrace(PTRACE_TRACEME, 0, nullptr, nullptr) != 0) _exit(126);
      ::raise(SIGSTOP);
    }
    ::execve(bash.c_str(), argv, envp.data());
    std::string msg = std::string("phase-warden: exec bash failed: ") +
                      std::strerror(errno) + "\n";
    WriteAll(STDERR_FILENO, msg);
    _exit(127);
  }
  return pid;
}

ExitInfo RunShell(const ShellCommand& command) {
  pid_t pid = SpawnShell(command, false);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) {
      throw RunError(std::string("waitpid failed: ") + std::strerror(errno));
    }
  }
  return DecodeWaitStatus(status);
}

}  // namespace phase_warden

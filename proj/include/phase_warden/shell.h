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

#ifndef PHASE_WARDEN_SHELL_H_
#define PHASE_WARDEN_SHELL_H_

#include <sys/types.h>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phase_warden/access.h"

namespace phase_warden {

struct ExitInfo {
  int code = 0;    // exit status, or 128 + signal number
  int signal = 0;  // non-zero when terminated by a signal

  friend bool operator==(const ExitInfo&, const ExitInfo&) = default;
};

ExitInfo DecodeWaitStatus(int status);

EnvMap CurrentEnvironment();
std::vector<std::string> EnvToStrings(const EnvMap& env);

// Looks `name` up along a colon-separated search path.
std::optional<std::filesystem::path> FindProgram(std::string_view name,
                                                 std::string_view search_path);

// The bash used for phase commands. Throws RunError if none is installed.
const std::filesystem::path& ShellPath();

std::string ShellQuote(std::string_view s);

// Builds the script a phase's shell runs. With env dump paths set, the
// shell's exported environment is written (NUL-delimited name=value) before
// the command, and again from an EXIT trap in the same shell afterwards.
// With `expose_builtins`, shell builtins that shadow real programs (`true`,
// `echo`, ...) are disabled so invocations resolve through the search path.
struct PhaseScriptOptions {
  std::optional<std::filesystem::path> env_before;
  std::optional<std::filesystem::path> env_after;
  bool expose_builtins = true;
};

std::string BuildPhaseScript(std::string_view command,
                             const PhaseScriptOptions& options);

struct ShellCommand {
  std::string script;
  std::filesystem::path cwd;
  EnvMap env;
  std::filesystem::path stdout_path;
  std::filesystem::path stderr_path;
};

// Forks `bash -c script` without waiting. With `traced`, the child requests
// tracing and stops itself with SIGSTOP before exec so a tracer can attach.
// Throws RunError when fork fails.
pid_t SpawnShell(const ShellCommand& command, bool traced);

// Runs `bash -c script` and waits for it. stdin is /dev/null. Throws RunError
// when the process cannot be started.
ExitInfo RunShell(const ShellCommand& command);

}  // namespace phase_warden

#endif  // PHASE_WARDEN_SHELL_H_

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

#include "phase_warden/env_capture.h"

#include <fstream>
#include <iterator>
#include <set>
#include <system_error>
#include <utility>

#include "phase_warden/glob.h"

namespace phase_warden {

EnvMap ParseEnvDump(std::string_view bytes) {
  EnvMap env;
  std::size_t start = 0;
  while (start < bytes.size()) {
    std::size_t end = bytes.find('\0', start);
    if (end == std::string_view::npos) break;
    std::string_view entry = bytes.substr(start, end - start);
    start = end + 1;
    std::size_t eq = entry.find('=');
    if (eq == std::string_view::npos || eq == 0) continue;
    std::string name(entry.substr(0, eq));
    if (name == "_") continue;
    env[std::move(name)] = std::string(entry.substr(eq + 1));
  }
  return env;
}

std::optional<EnvMap> ReadEnvDump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return ParseEnvDump(bytes);
}

EnvDelta DiffEnv(const EnvMap& before, const EnvMap& after) {
  EnvDelta delta;
  for (const auto& [name, value] : before) {
    auto it = after.find(name);
    if (it == after.end()) {
      delta.removed.emplace(name, value);
    } else if (it->second != value) {
      delta.changed.emplace(name, std::make_pair(value, it->second));
    }
  }
  for (const auto& [name, value] : after) {
    if (!before.contains(name)) delta.added.emplace(name, value);
  }
  return delta;
}

EnvCaptureResult CaptureEnv(std::string_view command,
                            const std::filesystem::path& workdir,
                            const EnvMap& env,
                            const std::filesystem::path& scratch) {
  std::error_code ec;
  std::filesystem::create_directories(scratch, ec);
  PhaseScriptOptions options;
  options.env_before = scratch / "env.before";
  options.env_after = scratch / "env.after";
  options.expose_builtins = false;
  std::filesystem::remove(*options.env_before, ec);
  std::filesystem::remove(*options.env_after, ec);

  ShellCommand cmd;
  cmd.script = BuildPhaseScript(command, options);
  cmd.cwd = workdir;
  cmd.env = env;
  cmd.stdout_path = scratch / "stdout";
  cmd.stderr_path = scratch / "stderr";
  EnvCaptureResult result;
  result.exit = RunShell(cmd);
  result.before = ReadEnvDump(*options.env_before);
  result.after = ReadEnvDump(*options.env_after);
  return result;
}

std::vector<EnvReadRecord> FindEnvReads(
    const EnvMap& env, const std::vector<std::string>& deny_patterns,
    const std::vector<ExecRecord>& execs) {
  std::vector<EnvReadRecord> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& [name, value] : env) {
    if (value.size() < 4) continue;
    bool denied = false;
    for (const std::string& pattern : deny_patterns) {
      if (MatchNameGlob(pattern, name)) {
        denied = true;
        break;
      }
    }
    if (!denied) continue;
    for (const ExecRecord& exec : execs) {
      for (std::size_t i = 1; i < exec.argv.size(); ++i) {
        if (exec.argv[i].find(value) == std::string::npos) continue;
        if (seen.emplace(name, exec.program).second) {
          out.push_back(EnvReadRecord{name, exec.program});
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace phase_warden

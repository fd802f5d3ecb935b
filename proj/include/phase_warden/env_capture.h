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

#ifndef PHASE_WARDEN_ENV_CAPTURE_H_
#define PHASE_WARDEN_ENV_CAPTURE_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phase_warden/access.h"
#include "phase_warden/shell.h"

namespace phase_warden {

// Parses a NUL-delimited `name=value` dump. An unterminated trailing entry
// is ignored, as is the shell's `_` variable.
EnvMap ParseEnvDump(std::string_view bytes);

// nullopt when the dump file was never written.
std::optional<EnvMap> ReadEnvDump(const std::filesystem::path& path);

EnvDelta DiffEnv(const EnvMap& before, const EnvMap& after);

struct EnvCaptureResult {
  ExitInfo exit;
  std::optional<EnvMap> before;  // nullopt: capture unavailable
  std::optional<EnvMap> after;
};

// Runs `command` in a shell that dumps its environment before the command
// and again, from the same shell, after it. Dumps and output captures are
// written into `scratch`.
EnvCaptureResult CaptureEnv(std::string_view command,
                            const std::filesystem::path& workdir,
                            const EnvMap& env,
                            const std::filesystem::path& scratch);

// Values of variables matching `deny_patterns` (name globs) that appear in
// the arguments of any executed program. Values shorter than four bytes are
// too ambiguous to trace and are skipped.
std::vector<EnvReadRecord> FindEnvReads(
    const EnvMap& env, const std::vector<std::string>& deny_patterns,
    const std::vector<ExecRecord>& execs);

}  // namespace phase_warden

#endif  // PHASE_WARDEN_ENV_CAPTURE_H_

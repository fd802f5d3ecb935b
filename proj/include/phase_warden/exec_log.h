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

// Exec logging through search-path shims. A directory of symlinks, one per
// program name found on the search path, all pointing at a small bash
// dispatcher that appends a record to a log and then execs the real program.
// Programs invoked by absolute path bypass the shims and are not logged.

#ifndef PHASE_WARDEN_EXEC_LOG_H_
#define PHASE_WARDEN_EXEC_LOG_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "phase_warden/access.h"
#include "phase_warden/shell.h"

namespace phase_warden {

inline constexpr char kExecLogVar[] = "PHASE_WARDEN_EXEC_LOG";
inline constexpr char kShimDirVar[] = "PHASE_WARDEN_SHIM_DIR";

class ExecShim {
 public:
  // (Re)creates `dir` populated with shims for every executable on
  // `search_path`. Throws BackendUnavailable on failure.
  static ExecShim Install(const std::filesystem::path& dir,
                          std::string_view search_path);

  const std::filesystem::path& dir() const { return dir_; }
  std::size_t size() const { return count_; }

  // Prepends the shim directory to PATH and points the shims at `log`.
  void Activate(EnvMap& env, const std::filesystem::path& log) const;

 private:
  ExecShim(std::filesystem::path dir, std::size_t count)
      : dir_(std::move(dir)), count_(count) {}

  std::filesystem::path dir_;
  std::size_t count_ = 0;
};

struct ExecLog {
  std::vector<ExecRecord> records;
  std::vector<std::string> warnings;
};

// Records are `timestamp NUL cwd NUL argv0 NUL ... argvN NUL \n`. A
// truncated final record is dropped with a warning.
ExecLog ParseExecLog(std::string_view bytes);
ExecLog ReadExecLog(const std::filesystem::path& path);

struct ExecLogResult {
  ExitInfo exit;
  std::vector<ExecRecord> records;
  std::vector<std::string> warnings;
};

// Runs `command` with shims active; shims and log live under `scratch`.
ExecLogResult ExecLogRun(std::string_view command,
                         const std::filesystem::path& workdir,
                         const EnvMap& env,
                         const std::filesystem::path& scratch);

}  // namespace phase_warden

#endif  // PHASE_WARDEN_EXEC_LOG_H_

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

// Runs phase commands under a monitoring backend and assembles what they
// did into observations.

#ifndef PHASE_WARDEN_RUNNER_H_
#define PHASE_WARDEN_RUNNER_H_

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phase_warden/access.h"
#include "phase_warden/exec_log.h"
#include "phase_warden/snapshot.h"
#include "phase_warden/spec.h"
#include "phase_warden/tracer.h"

namespace phase_warden {

enum class Backend { kAuto, kSnapshot, kTrace };

std::string_view ToString(Backend backend);
std::optional<Backend> BackendFromString(std::string_view s);

struct PhaseResult {
  std::string phase_name;
  int exit_code = 0;
  std::filesystem::path stdout_path;
  std::filesystem::path stderr_path;
  std::chrono::system_clock::time_point started_at;
  std::chrono::nanoseconds duration{0};
  Backend backend_used = Backend::kSnapshot;
  std::vector<std::string> warnings;
};

struct PhaseObservation {
  PhaseResult result;
  std::vector<AccessRecord> file_accesses;
  std::optional<EnvDelta> env_delta;                // nullopt: unavailable
  std::optional<std::vector<ExecRecord>> exec_records;
  std::vector<EnvReadRecord> env_reads;
  std::vector<FailedAccess> failed_accesses;        // trace backend only
};

struct RunReport {
  std::string spec_digest;
  std::vector<PhaseObservation> observations;
  std::optional<std::string> aborted_at;
};

struct RunOptions {
  bool stop_on_phase_failure = true;
  Backend backend = Backend::kAuto;
  // Added to (and overriding) the inherited environment of every phase.
  EnvMap extra_env;
  // Reset access times before each phase so reads register under relatime.
  bool prime_atimes = true;
  std::optional<std::filesystem::path> work_dir;
};

class PhaseRunner {
 public:
  // `global_excludes` are the spec's; the work directory is added.
  PhaseRunner(std::filesystem::path root, RunOptions options,
              std::vector<std::string> global_excludes);

  // Runs one phase. The caller is expected to hold the project lock.
  PhaseObservation RunPhase(const PhaseSpec& phase);

  const std::filesystem::path& root() const { return root_; }
  const std::filesystem::path& work_dir() const { return work_dir_; }
  const std::vector<std::string>& excludes() const { return excludes_; }
  const RunOptions& options() const { return options_; }

  // Probed lazily, once per runner.
  const AtimeProbe& atime_probe();

  // The backend a phase will actually use, with the warning explaining a
  // fallback if there was one.
  Backend EffectiveBackend(std::string* warning);

 private:
  const ExecShim& Shim(const EnvMap& env);

  std::filesystem::path root_;
  RunOptions options_;
  std::filesystem::path work_dir_;
  std::vector<std::string> excludes_;
  std::optional<AtimeProbe> atime_probe_;
  std::optional<ExecShim> shim_;
};

// Runs every phase in declaration order while holding the project lock.
// Throws ProjectError when `root` is not a directory and LockContention when
// another run is active.
RunReport RunPipeline(const PipelineSpec& spec,
                      const std::filesystem::path& root,
                      const RunOptions& options = {});

}  // namespace phase_warden

#endif  // PHASE_WARDEN_RUNNER_H_

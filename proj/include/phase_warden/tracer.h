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

// Syscall-tracing backend (Linux ptrace). Follows the whole process tree of
// a phase's shell and turns file-changing and file-opening syscalls into
// access records.

#ifndef PHASE_WARDEN_TRACER_H_
#define PHASE_WARDEN_TRACER_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "phase_warden/access.h"
#include "phase_warden/shell.h"

namespace phase_warden {

struct TraceProbe {
  bool available = false;
  std::string reason;
};

// Checks once per process whether syscall tracing works here.
const TraceProbe& ProbeTracing();

// A syscall on a path that failed with EACCES or EPERM.
struct FailedAccess {
  std::string path;  // project-relative, or absolute when outside the root
  std::string syscall;
  int error = 0;
  bool external = false;
};

struct TraceResult {
  ExitInfo exit;
  std::vector<AccessRecord> accesses;  // deduplicated by (path, mode)
  std::vector<ExecRecord> execs;
  std::vector<FailedAccess> failures;
  std::vector<std::string> warnings;
};

// Runs `command` under the tracer. Paths under `project_root` are reported
// relative to it; paths matching `excludes` are dropped; everything else is
// reported absolute with `external` set. Directory opens are ignored. The
// shell's own initial exec is not recorded. Throws BackendUnavailable when
// tracing is not possible.
TraceResult TraceRun(const ShellCommand& command,
                     const std::filesystem::path& project_root,
                     std::string_view phase,
                     const std::vector<std::string>& excludes);

}  // namespace phase_warden

#endif  // PHASE_WARDEN_TRACER_H_

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

#include "phase_warden/runner.h"

#include <sys/stat.h>

#include <set>
#include <system_error>
#include <utility>

#include "phase_warden/env_capture.h"
#include "phase_warden/error.h"
#include "phase_warden/shell.h"
#include "phase_warden/workspace.h"

namespace phase_warden {
namespace {

std::string SafeName(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

std::filesystem::path CanonicalRoot(const std::filesystem::path& root) {
  struct stat st {};
  if (::stat(root.c_str(), &st) != 0 || !S_ISDIR(st.st_mode)) {
    throw ProjectError("project root '" + root.string() +
                       "' does not exist or is not a directory");
  }
  std::error_code ec;
  std::filesystem::path canon = std::filesystem::canonical(root, ec);
  return ec ? std::filesystem::absolute(root) : canon;
}

}  // namespace

std::string_view ToString(Backend backend) {
  switch (backend) {
    case Backend::kAuto: return "auto";
    case Backend::kSnapshot: return "snapshot";
    case Backend::kTrace: return "trace";
  }
  return "?";
}

std::optional<Backend> BackendFromString(std::string_view s) {
  for (Backend b : {Backend::kAuto, Backend::kSnapshot, Backend::kTrace}) {
    if (ToString(b) == s) return b;
  }
  return std::nullopt;
}

PhaseRunner::PhaseRunner(std::filesystem::path root, RunOptions options,
                         std::vector<std::string> global_excludes)
    : root_(CanonicalRoot(root)),
      options_(std::move(options)),
      work_dir_(ResolveWorkDir(root_, options_.work_dir)),
      excludes_(std::move(global_excludes)) {
  if (auto ex = WorkDirExclude(root_, work_dir_)) excludes_.push_back(*ex);
  std::error_code ec;
  std::filesystem::create_directories(work_dir_, ec);
  if (ec) {
    throw ProjectError("cannot create work directory '" + work_dir_.string() +
                       "': " + ec.message());
  }
}

const AtimeProbe& PhaseRunner::atime_probe() {
  if (!atime_probe_) {
    // Probe on the project's filesystem; the work directory usually lives
    // there and is excluded from monitoring.
    const bool inside = WorkDirExclude(root_, work_dir_).has_value();
    atime_probe_ = ProbeAtimeReliability(inside ? work_dir_ : root_);
  }
  return *atime_probe_;
}

Backend PhaseRunner::EffectiveBackend(std::string* warning) {
  if (options_.backend == Backend::kSnapshot) return Backend::kSnapshot;
  const TraceProbe& probe = ProbeTracing();
  if (probe.available) return Backend::kTrace;
  if (warning) {
    *warning = "syscall tracing unavailable (" + probe.reason +
               "); falling back to the snapshot backend";
  }
  return Backend::kSnapshot;
}

const ExecShim& PhaseRunner::Shim(const EnvMap& env) {
  auto it = env.find("PATH");
  const std::string path = it == env.end() ? "" : it->second;
  if (!shim_) shim_ = ExecShim::Install(work_dir_ / "shims", path);
  return *shim_;
}

PhaseObservation PhaseRunner::RunPhase(const PhaseSpec& phase) {
  PhaseObservation obs;
  PhaseResult& result = obs.result;
  result.phase_name = phase.name;

  std::string fallback;
  result.backend_used = EffectiveBackend(&fallback);
  if (!fallback.empty()) result.warnings.push_back(fallback);
  const bool tracing = result.backend_used == Backend::kTrace;

  const AtimeProbe& probe = atime_probe();
  if (!probe.reliable) {
    result.warnings.push_back(
        "access times are not updated on this filesystem (" + probe.reason +
        "); read detection from snapshots is disabled, use --backend trace");
  }

  const std::filesystem::path scratch = work_dir_ / "phases" / SafeName(phase.name);
  std::error_code ec;
  std::filesystem::remove_all(scratch, ec);
  std::filesystem::create_directories(scratch, ec);
  if (ec) {
    throw RunError("cannot create '" + scratch.string() + "': " + ec.message());
  }
  result.stdout_path = scratch / "stdout";
  result.stderr_path = scratch / "stderr";
  const std::filesystem::path env_before = scratch / "env.before";
  const std::filesystem::path env_after = scratch / "env.after";
  const std::filesystem::path exec_log = scratch / "exec.log";

  EnvMap env = CurrentEnvironment();
  for (const auto& [k, v] : options_.extra_env) env[k] = v;
  if (!tracing) Shim(env).Activate(env, exec_log);

  ShellCommand cmd;
  PhaseScriptOptions script_options;
  script_options.env_before = env_before;
  script_options.env_after = env_after;
  cmd.script = BuildPhaseScript(phase.command, script_options);
  cmd.cwd = root_ / phase.workdir;
  cmd.env = std::move(env);
  cmd.stdout_path = result.stdout_path;
  cmd.stderr_path = result.stderr_path;

  if (options_.prime_atimes && probe.reliable) {
    PrimeAccessTimes(root_, excludes_);
  }
  FsSnapshot before = TakeSnapshot(root_, excludes_, probe.reliable);
  for (const std::string& w : before.warnings) result.warnings.push_back(w);

  result.started_at = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<TraceResult> trace;
  ExitInfo exit;
  if (tracing) {
    trace = TraceRun(cmd, root_, phase.name, excludes_);
    exit = trace->exit;
  } else {
    exit = RunShell(cmd);
  }
  result.duration = std::chrono::steady_clock::now() - t0;
  result.exit_code = exit.code;

  FsSnapshot after = TakeSnapshot(root_, excludes_, probe.reliable);
  std::vector<AccessRecord> diff = DiffSnapshots(before, after, phase.name);

  if (tracing) {
    obs.file_accesses = std::move(trace->accesses);
    std::set<std::pair<std::string, AccessMode>> traced;
    for (const AccessRecord& r : obs.file_accesses) traced.emplace(r.path, r.mode);
    for (AccessRecord& r : diff) {
      if (r.mode == AccessMode::kTouch || traced.contains({r.path, r.mode})) {
        continue;
      }
      result.warnings.push_back("snapshot saw " + std::string(ToString(r.mode)) +
                                " of '" + r.path + "' that the tracer missed");
      obs.file_accesses.push_back(std::move(r));
    }
    obs.exec_records = std::move(trace->execs);
    obs.failed_accesses = std::move(trace->failures);
    for (std::string& w : trace->warnings) result.warnings.push_back(std::move(w));
  } else {
    obs.file_accesses = std::move(diff);
    ExecLog log = ReadExecLog(exec_log);
    obs.exec_records = std::move(log.records);
    for (std::string& w : log.warnings) result.warnings.push_back(std::move(w));
  }

  std::optional<EnvMap> env_pre = ReadEnvDump(env_before);
  std::optional<EnvMap> env_post = ReadEnvDump(env_after);
  if (env_pre && env_post) {
    obs.env_delta = DiffEnv(*env_pre, *env_post);
  } else {
    result.warnings.push_back(
        "environment capture unavailable: the phase shell exited without "
        "writing its environment dump");
  }
  obs.env_reads = FindEnvReads(env_pre ? *env_pre : cmd.env,
                               phase.env_policy.deny_read, *obs.exec_records);
  return obs;
}

RunReport RunPipeline(const PipelineSpec& spec,
                      const std::filesystem::path& root,
                      const RunOptions& options) {
  PhaseRunner runner(root, options, spec.global_excludes);
  ProjectLock lock = ProjectLock::Acquire(runner.work_dir());
  RunReport report;
  report.spec_digest = SpecDigest(spec);
  for (const PhaseSpec& phase : spec.phases) {
    report.observations.push_back(runner.RunPhase(phase));
    if (options.stop_on_phase_failure &&
        report.observations.back().result.exit_code != 0) {
      report.aborted_at = phase.name;
      break;
    }
  }
  return report;
}

}  // namespace phase_warden

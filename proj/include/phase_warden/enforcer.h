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

// Enforcement by permission masking: paths a phase must not touch lose their
// permission bits for the duration of the phase and get them back afterwards.
//
// Rules covering reads ({any} or read) strip every rwx bit. Rules limited to
// write/create/delete strip only the write bits, so the phase can still read.

#ifndef PHASE_WARDEN_ENFORCER_H_
#define PHASE_WARDEN_ENFORCER_H_

#include <sys/types.h>

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phase_warden/runner.h"
#include "phase_warden/spec.h"

namespace phase_warden {

struct PrivilegeStatus {
  bool privileged = false;
  std::string reason;
};

// Root, or any capability that overrides file permission checks.
PrivilegeStatus CheckPrivilege();

struct MaskEntry {
  std::string abs_path;
  std::string rel_path;
  mode_t original = 0;  // permission bits (07777) before masking
  mode_t masked = 0;
  bool directory = false;

  friend bool operator==(const MaskEntry&, const MaskEntry&) = default;
};

struct MaskState {
  std::vector<MaskEntry> entries;  // in application order, deepest first
  std::chrono::system_clock::time_point applied_at;
  std::string phase_name;
  bool restored = false;

  friend bool operator==(const MaskState&, const MaskState&) = default;
};

// The entries ApplyMask would create, without touching anything. Symlinks
// are skipped (changing their mode would change the target's).
std::vector<MaskEntry> PlanMask(const std::filesystem::path& root,
                                const std::vector<PathRule>& deny,
                                const std::vector<std::string>& excludes = {});

// Throws PrivilegeError when CheckPrivilege() reports privilege, and
// MaskError (after undoing what was applied) when a chmod fails.
MaskState ApplyMask(const std::filesystem::path& root,
                    const std::vector<PathRule>& deny, std::string_view phase,
                    const std::vector<std::string>& excludes = {});

// Restores every entry, parents first. Entries whose path vanished produce
// warnings (returned). Other failures are collected and thrown together as
// MaskError after all entries were attempted. Throws MaskError when `state`
// was already restored.
std::vector<std::string> RestoreMask(MaskState& state);

std::string MaskStateToJson(const MaskState& state);
MaskState MaskStateFromJson(std::string_view json);
void SaveMaskState(const MaskState& state, const std::filesystem::path& path);
// nullopt when no state file exists.
std::optional<MaskState> LoadMaskState(const std::filesystem::path& path);

inline constexpr char kMaskStateFile[] = "mask-state";

enum class DeniedVia { kPhaseErrorOutput, kTrace, kPostHocAtime };

std::string_view ToString(DeniedVia via);

struct DeniedAttempt {
  std::string phase_name;
  std::string rel_path;
  DeniedVia observed_via = DeniedVia::kPhaseErrorOutput;
  std::string detail;

  friend bool operator==(const DeniedAttempt&, const DeniedAttempt&) = default;
};

// Denied attempts evidenced by permission errors in `stderr_text` that name
// a masked path, and by failed syscalls on denied paths (trace backend).
// Every result's rel_path matches one of `deny`.
std::vector<DeniedAttempt> DetectDeniedAttempts(
    std::string_view phase, std::string_view stderr_text,
    const MaskState& mask, const std::vector<PathRule>& deny,
    const std::vector<FailedAccess>& failures);

struct EnforcementResult {
  PhaseObservation observation;
  std::vector<DeniedAttempt> denied;
  std::vector<std::string> warnings;
  MaskState mask;
};

// Masks the phase's enabled deny rules, runs it, and restores the mask even
// when the run throws. The mask state is persisted under the runner's work
// directory while live. Throws ProjectError when a previous mask was never
// restored.
EnforcementResult EnforcePhase(PhaseRunner& runner, const PhaseSpec& phase);

}  // namespace phase_warden

#endif  // PHASE_WARDEN_ENFORCER_H_

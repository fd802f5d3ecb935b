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

// Compares observed phase behavior with the phase's declared permissions.

#ifndef PHASE_WARDEN_CHECKER_H_
#define PHASE_WARDEN_CHECKER_H_

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phase_warden/access.h"
#include "phase_warden/runner.h"
#include "phase_warden/spec.h"

namespace phase_warden {

enum class SubjectKind { kFile, kEnv, kExec };

std::string_view ToString(SubjectKind kind);
std::optional<SubjectKind> SubjectKindFromString(std::string_view s);

// Where a violated rule came from.
inline constexpr char kPolicyDeny[] = "deny";
inline constexpr char kPolicyEnvDenyRead[] = "env.deny_read";
inline constexpr char kPolicyEnvDenyModify[] = "env.deny_modify";
inline constexpr char kPolicyExecDenied[] = "exec.denied_programs";
inline constexpr char kPolicyExecAllowed[] = "exec.allowed_programs";

struct RuleRef {
  // Path glob for file rules, variable/program name glob for policies. For
  // allow-list exec violations this is the literal "allowed_programs".
  std::string pattern;
  ModeSet modes = ModeSet::Any();
  std::string origin;
  std::string policy = kPolicyDeny;

  friend bool operator==(const RuleRef&, const RuleRef&) = default;
};

struct Violation {
  std::string phase_name;
  std::string subject;
  SubjectKind subject_kind = SubjectKind::kFile;
  AccessMode mode = AccessMode::kRead;
  RuleRef rule;
  Evidence evidence = Evidence::kTrace;
  Severity severity = Severity::kError;
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct PhaseRunInfo {
  std::string name;
  int exit_code = 0;
  Backend backend = Backend::kSnapshot;
  std::chrono::system_clock::time_point started_at;
  std::chrono::nanoseconds duration{0};
  std::vector<std::string> warnings;

  friend bool operator==(const PhaseRunInfo&, const PhaseRunInfo&) = default;
};

struct ViolationCounts {
  std::size_t file = 0;
  std::size_t env = 0;
  std::size_t exec = 0;
  std::size_t total() const { return file + env + exec; }

  friend bool operator==(const ViolationCounts&, const ViolationCounts&) = default;
};

struct ViolationReport {
  std::string spec_digest;
  std::chrono::system_clock::time_point generated_at;
  std::optional<std::string> aborted_at;
  std::vector<PhaseRunInfo> phases;  // in run order
  std::vector<Violation> violations; // grouped by phase, in run order
  // Informational: accesses outside a phase's allow list.
  std::vector<std::string> notes;

  ViolationCounts CountsFor(std::string_view phase) const;
  bool empty() const { return violations.empty(); }

  friend bool operator==(const ViolationReport&, const ViolationReport&) = default;
};

// True iff the rule is enabled, its glob matches `rel_path`, and its modes
// cover `mode` (`touch` and `exec` are only covered by {any}).
bool MatchPathRule(const PathRule& rule, std::string_view rel_path,
                   AccessMode mode);

// Violations of one phase. External paths are never checked. Accesses no
// allow rule covers are reported through `notes`, not as violations.
std::vector<Violation> CheckPhase(const PhaseSpec& phase,
                                  const PhaseObservation& obs,
                                  std::vector<std::string>* notes = nullptr);

// Throws StaleReportError when `run` was produced under a different spec.
ViolationReport CheckRun(const PipelineSpec& spec, const RunReport& run);

// Re-evaluates a violation against its recorded rule; the soundness check.
bool RuleStillMatches(const Violation& violation);

}  // namespace phase_warden

#endif  // PHASE_WARDEN_CHECKER_H_

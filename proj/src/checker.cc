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

#include "phase_warden/checker.h"

#include <algorithm>
#include <set>
#include <tuple>
#include <utility>

#include "phase_warden/error.h"
#include "phase_warden/glob.h"

namespace phase_warden {
namespace {

RuleRef RefOf(const PathRule& rule) {
  return RuleRef{rule.pattern(), rule.modes, rule.origin, kPolicyDeny};
}

const std::string* FirstNameMatch(const std::vector<std::string>& patterns,
                                  std::string_view name) {
  for (const std::string& p : patterns) {
    if (MatchNameGlob(p, name)) return &p;
  }
  return nullptr;
}

void CheckEnv(const PhaseSpec& phase, const PhaseObservation& obs,
              std::vector<Violation>& out) {
  const EnvPolicy& policy = phase.env_policy;
  if (obs.env_delta && !policy.deny_modify.empty()) {
    auto check = [&](const std::string& name, AccessMode mode,
                     std::string detail) {
      const std::string* p = FirstNameMatch(policy.deny_modify, name);
      if (p == nullptr) return;
      out.push_back(Violation{phase.name, name, SubjectKind::kEnv, mode,
                              RuleRef{*p, ModeSet::Any(), "",
                                      kPolicyEnvDenyModify},
                              Evidence::kEnvDiff, Severity::kError,
                              std::move(detail)});
    };
    for (const auto& [name, value] : obs.env_delta->added) {
      check(name, AccessMode::kCreate, "set to '" + value + "'");
    }
    for (const auto& [name, value] : obs.env_delta->removed) {
      check(name, AccessMode::kDelete, "unset (was '" + value + "')");
    }
    for (const auto& [name, values] : obs.env_delta->changed) {
      check(name, AccessMode::kWrite,
            "changed '" + values.first + "' -> '" + values.second + "'");
    }
  }
  std::set<std::string> reported;
  for (const EnvReadRecord& read : obs.env_reads) {
    const std::string* p = FirstNameMatch(policy.deny_read, read.variable);
    if (p == nullptr || !reported.insert(read.variable).second) continue;
    const Evidence ev = obs.result.backend_used == Backend::kTrace
                            ? Evidence::kTrace
                            : Evidence::kExecLog;
    out.push_back(Violation{phase.name, read.variable, SubjectKind::kEnv,
                            AccessMode::kRead,
                            RuleRef{*p, ModeSet::Any(), "", kPolicyEnvDenyRead},
                            ev, Severity::kError,
                            "value passed to " + read.program});
  }
}

void CheckExec(const PhaseSpec& phase, const PhaseObservation& obs,
               std::vector<Violation>& out) {
  const ExecPolicy& policy = phase.exec_policy;
  if (!obs.exec_records || policy.empty()) return;
  const Evidence ev = obs.result.backend_used == Backend::kTrace
                          ? Evidence::kTrace
                          : Evidence::kExecLog;
  std::set<std::string> seen;
  for (const ExecRecord& rec : *obs.exec_records) {
    if (seen.contains(rec.program)) continue;
    std::string detail = "argv:";
    for (const std::string& a : rec.argv) detail += " " + a;
    if (const std::string* p = FirstNameMatch(policy.denied_programs, rec.program)) {
      seen.insert(rec.program);
      out.push_back(Violation{phase.name, rec.program, SubjectKind::kExec,
                              AccessMode::kExec,
                              RuleRef{*p, ModeSet::Any(), "", kPolicyExecDenied},
                              ev, Severity::kError, std::move(detail)});
    } else if (policy.allowed_programs &&
               FirstNameMatch(*policy.allowed_programs, rec.program) == nullptr) {
      seen.insert(rec.program);
      out.push_back(Violation{phase.name, rec.program, SubjectKind::kExec,
                              AccessMode::kExec,
                              RuleRef{"allowed_programs", ModeSet::Any(), "",
                                      kPolicyExecAllowed},
                              ev, Severity::kError, std::move(detail)});
    }
  }
}

}  // namespace

std::string_view ToString(SubjectKind kind) {
  switch (kind) {
    case SubjectKind::kFile: return "file";
    case SubjectKind::kEnv: return "env";
    case SubjectKind::kExec: return "exec";
  }
  return "?";
}

std::optional<SubjectKind> SubjectKindFromString(std::string_view s) {
  for (SubjectKind k : {SubjectKind::kFile, SubjectKind::kEnv, SubjectKind::kExec}) {
    if (ToString(k) == s) return k;
  }
  return std::nullopt;
}

ViolationCounts ViolationReport::CountsFor(std::string_view phase) const {
  ViolationCounts c;
  for (const Violation& v : violations) {
    if (v.phase_name != phase) continue;
    switch (v.subject_kind) {
      case SubjectKind::kFile: ++c.file; break;
      case SubjectKind::kEnv: ++c.env; break;
      case SubjectKind::kExec: ++c.exec; break;
    }
  }
  return c;
}

bool MatchPathRule(const PathRule& rule, std::string_view rel_path,
                   AccessMode mode) {
  return rule.enabled && rule.modes.Covers(mode) && rule.glob.Matches(rel_path);
}

std::vector<Violation> CheckPhase(const PhaseSpec& phase,
                                  const PhaseObservation& obs,
                                  std::vector<std::string>* notes) {
  std::vector<Violation> out;
  const auto& allow = phase.permissions.allow;
  for (const AccessRecord& rec : obs.file_accesses) {
    if (rec.external) continue;
    bool denied = false;
    for (const PathRule& rule : phase.permissions.deny) {
      if (!MatchPathRule(rule, rec.path, rec.mode)) continue;
      out.push_back(Violation{phase.name, rec.path, SubjectKind::kFile,
                              rec.mode, RefOf(rule), rec.evidence,
                              rule.severity, rec.detail});
      denied = true;
      break;
    }
    if (denied || allow.empty() || notes == nullptr) continue;
    const bool covered = std::any_of(
        allow.begin(), allow.end(),
        [&](const PathRule& r) { return MatchPathRule(r, rec.path, rec.mode); });
    if (!covered) {
      notes->push_back(phase.name + ": " + std::string(ToString(rec.mode)) +
                       " of " + rec.path + " is outside the allow list");
    }
  }
  CheckEnv(phase, obs, out);
  CheckExec(phase, obs, out);
  std::stable_sort(out.begin(), out.end(),
                   [](const Violation& a, const Violation& b) {
                     return std::tie(a.subject_kind, a.subject, a.mode) <
                            std::tie(b.subject_kind, b.subject, b.mode);
                   });
  return out;
}

ViolationReport CheckRun(const PipelineSpec& spec, const RunReport& run) {
  const std::string digest = SpecDigest(spec);
  if (digest != run.spec_digest) {
    throw StaleReportError("run report was produced under spec " +
                           run.spec_digest + ", not " + digest);
  }
  ViolationReport report;
  report.spec_digest = digest;
  report.generated_at = std::chrono::system_clock::now();
  report.aborted_at = run.aborted_at;
  for (const PhaseObservation& obs : run.observations) {
    const PhaseResult& r = obs.result;
    report.phases.push_back(PhaseRunInfo{r.phase_name, r.exit_code,
                                         r.backend_used, r.started_at,
                                         r.duration, r.warnings});
    const PhaseSpec* phase = spec.FindPhase(r.phase_name);
    if (phase == nullptr) {
      throw StaleReportError("run report contains unknown phase '" +
                             r.phase_name + "'");
    }
    std::vector<Violation> v = CheckPhase(*phase, obs, &report.notes);
    report.violations.insert(report.violations.end(),
                             std::make_move_iterator(v.begin()),
                             std::make_move_iterator(v.end()));
  }
  return report;
}

bool RuleStillMatches(const Violation& v) {
  switch (v.subject_kind) {
    case SubjectKind::kFile: {
      if (v.rule.policy != kPolicyDeny) return false;
      PathRule rule = PathRule::Make(v.rule.pattern, v.rule.modes);
      return MatchPathRule(rule, v.subject, v.mode);
    }
    case SubjectKind::kEnv:
      return (v.rule.policy == kPolicyEnvDenyRead ||
              v.rule.policy == kPolicyEnvDenyModify) &&
             MatchNameGlob(v.rule.pattern, v.subject);
    case SubjectKind::kExec:
      if (v.rule.policy == kPolicyExecAllowed) return true;
      return v.rule.policy == kPolicyExecDenied &&
             MatchNameGlob(v.rule.pattern, v.subject);
  }
  return false;
}

}  // namespace phase_warden

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

// Pipeline specs: which phases a project has, how to run them, and
// what each phase is allowed to touch.
//
// Spec file (UTF-8 JSON, unknown keys rejected):
//
//   {
//     "version": 1,
//     "global_excludes": [".git/"],
//     "phases": [
//       {"name": "configure", "command": "./configure"},
//       {"name": "compile", "command": "make", "deny": ["tests/files/"]},
//       {"name": "test", "command": "make check", "workdir": ".",
//        "deny": [{"pattern": "src/", "modes": ["write", "delete"]}],
//        "env": {"deny_read": ["AWS_*"], "deny_modify": ["LD_*"]},
//        "exec": {"denied_programs": ["curl", "wget"]}}
//     ]
//   }
//
// A bare string rule means modes {any}. Object rules may also carry
// "severity" ("error" | "warn"), "origin" (a free-form provenance tag such as
// an inference heuristic id) and "enabled" (false keeps the rule in the file
// but inert).

#ifndef PHASE_WARDEN_SPEC_H_
#define PHASE_WARDEN_SPEC_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phase_warden/glob.h"

namespace phase_warden {

inline constexpr int kSpecVersion = 1;

// Kinds of access observed on a file (or, for `kExec`, a program run).
enum class AccessMode { kRead, kWrite, kCreate, kDelete, kTouch, kExec };

std::string_view ToString(AccessMode mode);
std::optional<AccessMode> AccessModeFromString(std::string_view s);

// Modes a rule can name. `kAny` subsumes the rest.
enum class RuleMode : std::uint8_t {
  kRead = 1 << 0,
  kWrite = 1 << 1,
  kCreate = 1 << 2,
  kDelete = 1 << 3,
  kAny = 1 << 4,
};

std::string_view ToString(RuleMode mode);
std::optional<RuleMode> RuleModeFromString(std::string_view s);

// Normalized, non-empty set of rule modes. A set containing `kAny` is exactly
// {any}.
class ModeSet {
 public:
  static ModeSet Any() { return ModeSet(static_cast<std::uint8_t>(RuleMode::kAny)); }
  static ModeSet Of(std::initializer_list<RuleMode> modes);

  // Adds `mode`, re-normalizing to {any} when needed.
  ModeSet With(RuleMode mode) const;

  bool Contains(RuleMode mode) const {
    return bits_ & static_cast<std::uint8_t>(mode);
  }
  bool IsAny() const { return Contains(RuleMode::kAny); }

  // Whether an observed access in `mode` falls under this set. `kTouch` is
  // only covered by {any}.
  bool Covers(AccessMode mode) const;

  bool empty() const { return bits_ == 0; }
  std::vector<RuleMode> ToVector() const;

  friend bool operator==(ModeSet, ModeSet) = default;

 private:
  explicit ModeSet(std::uint8_t bits) : bits_(bits) {}
  std::uint8_t bits_ = 0;
};

enum class Severity { kError, kWarn };

std::string_view ToString(Severity severity);
std::optional<Severity> SeverityFromString(std::string_view s);

struct PathRule {
  PathGlob glob;
  ModeSet modes;
  Severity severity = Severity::kError;
  std::string origin;
  bool enabled = true;

  // Throws SpecError on a malformed pattern or empty mode set.
  static PathRule Make(std::string_view pattern, ModeSet modes = ModeSet::Any());

  const std::string& pattern() const { return glob.pattern(); }

  friend bool operator==(const PathRule&, const PathRule&) = default;
};

// Allow rules are advisory in v1; the default policy is allow.
struct PermissionSet {
  std::vector<PathRule> deny;
  std::vector<PathRule> allow;

  friend bool operator==(const PermissionSet&, const PermissionSet&) = default;
};

struct EnvPolicy {
  std::vector<std::string> deny_read;
  std::vector<std::string> deny_modify;

  bool empty() const { return deny_read.empty() && deny_modify.empty(); }
  friend bool operator==(const EnvPolicy&, const EnvPolicy&) = default;
};

struct ExecPolicy {
  std::vector<std::string> denied_programs;
  // When present, programs outside this list are violations.
  std::optional<std::vector<std::string>> allowed_programs;

  bool empty() const {
    return denied_programs.empty() && !allowed_programs.has_value();
  }
  friend bool operator==(const ExecPolicy&, const ExecPolicy&) = default;
};

struct PhaseSpec {
  std::string name;
  std::string command;
  std::string workdir = ".";  // normalized, project-relative
  PermissionSet permissions;
  EnvPolicy env_policy;
  ExecPolicy exec_policy;

  friend bool operator==(const PhaseSpec&, const PhaseSpec&) = default;
};

struct PipelineSpec {
  int version = kSpecVersion;
  std::vector<std::string> global_excludes;
  std::vector<PhaseSpec> phases;

  const PhaseSpec* FindPhase(std::string_view name) const;

  friend bool operator==(const PipelineSpec&, const PipelineSpec&) = default;
};

// Parses and validates a spec document, applying normalization. Throws
// SpecError naming the offending location.
PipelineSpec ParseSpec(std::string_view text);

PipelineSpec LoadSpecFile(const std::filesystem::path& path);

// Checks the structural invariants; throws SpecError. ParseSpec calls this.
void ValidateSpec(const PipelineSpec& spec);

// Normalizes workdirs in place. Idempotent.
void NormalizeSpec(PipelineSpec& spec);

std::string SerializeSpec(const PipelineSpec& spec);

// SHA-256 (hex) of the canonical serialization.
std::string SpecDigest(const PipelineSpec& spec);

struct SpecWarning {
  std::string location;
  std::string message;
};

// Non-fatal findings against a concrete tree: deny patterns that match
// nothing, missing workdirs, allow/deny pairs with identical pattern and
// modes. Throws ProjectError when `project_root` is missing or unreadable.
std::vector<SpecWarning> ValidateAgainstProject(
    const PipelineSpec& spec, const std::filesystem::path& project_root);

}  // namespace phase_warden

#endif  // PHASE_WARDEN_SPEC_H_

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

// Observed phase behavior: file accesses, environment changes and program
// executions.

#ifndef PHASE_WARDEN_ACCESS_H_
#define PHASE_WARDEN_ACCESS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phase_warden/spec.h"

namespace phase_warden {

enum class Evidence {
  kAtimeDiff,
  kMtimeDiff,
  kSizeDiff,
  kExistenceDiff,
  kCtimeDiff,
  kTrace,
  kExecLog,
  kEnvDiff,  // before/after environment dumps differ
};

std::string_view ToString(Evidence evidence);
std::optional<Evidence> EvidenceFromString(std::string_view s);

// Whether `evidence` can legitimately support an access in `mode`.
bool EvidencePermitted(AccessMode mode, Evidence evidence);

struct AccessRecord {
  std::string phase_name;
  // Project-relative for accesses under the root; absolute when `external`.
  std::string path;
  AccessMode mode = AccessMode::kRead;
  Evidence evidence = Evidence::kTrace;
  std::string detail;
  bool external = false;

  friend bool operator==(const AccessRecord&, const AccessRecord&) = default;
};

using EnvMap = std::map<std::string, std::string>;

struct EnvDelta {
  EnvMap added;
  EnvMap removed;  // name -> prior value
  std::map<std::string, std::pair<std::string, std::string>> changed;

  bool empty() const { return added.empty() && removed.empty() && changed.empty(); }
  friend bool operator==(const EnvDelta&, const EnvDelta&) = default;
};

struct ExecRecord {
  std::string program;  // basename of argv[0]
  std::vector<std::string> argv;
  std::string cwd;
  std::int64_t timestamp_ns = 0;

  friend bool operator==(const ExecRecord&, const ExecRecord&) = default;
};

// A denied environment read: the value of a protected variable appeared in
// the argument vector of a program the phase ran.
struct EnvReadRecord {
  std::string variable;
  std::string program;

  friend bool operator==(const EnvReadRecord&, const EnvReadRecord&) = default;
};

}  // namespace phase_warden

#endif  // PHASE_WARDEN_ACCESS_H_

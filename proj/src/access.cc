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

#include "phase_warden/access.h"

namespace phase_warden {

std::string_view ToString(Evidence evidence) {
  switch (evidence) {
    case Evidence::kAtimeDiff: return "atime_diff";
    case Evidence::kMtimeDiff: return "mtime_diff";
    case Evidence::kSizeDiff: return "size_diff";
    case Evidence::kExistenceDiff: return "existence_diff";
    case Evidence::kCtimeDiff: return "ctime_diff";
    case Evidence::kTrace: return "trace";
    case Evidence::kExecLog: return "exec_log";
    case Evidence::kEnvDiff: return "env_diff";
  }
  return "?";
}

std::optional<Evidence> EvidenceFromString(std::string_view s) {
  for (Evidence e : {Evidence::kAtimeDiff, Evidence::kMtimeDiff,
                     Evidence::kSizeDiff, Evidence::kExistenceDiff,
                     Evidence::kCtimeDiff, Evidence::kTrace,
                     Evidence::kExecLog, Evidence::kEnvDiff}) {
    if (ToString(e) == s) return e;
  }
  return std::nullopt;
}

bool EvidencePermitted(AccessMode mode, Evidence evidence) {
  if (evidence == Evidence::kTrace) return mode != AccessMode::kTouch;
  if (evidence == Evidence::kEnvDiff) {
    return mode == AccessMode::kCreate || mode == AccessMode::kWrite ||
           mode == AccessMode::kDelete;
  }
  switch (mode) {
    case AccessMode::kCreate:
    case AccessMode::kDelete:
      return evidence == Evidence::kExistenceDiff;
    case AccessMode::kWrite:
      return evidence == Evidence::kMtimeDiff || evidence == Evidence::kSizeDiff;
    case AccessMode::kRead:
      return evidence == Evidence::kAtimeDiff || evidence == Evidence::kExecLog;
    case AccessMode::kTouch:
      return evidence == Evidence::kCtimeDiff;
    case AccessMode::kExec:
      return evidence == Evidence::kExecLog;
  }
  return false;
}

}  // namespace phase_warden

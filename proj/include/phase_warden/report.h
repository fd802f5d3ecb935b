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

// Text and JSON renderings of violation reports.
//
// Text: one line per violation,
//   <phase>: denied <mode> access to <subject> (rule: <pattern>)
// where <subject> is a project path, `env NAME`, or `program NAME`, and
// warn-severity lines end in ` [warn]`.

#ifndef PHASE_WARDEN_REPORT_H_
#define PHASE_WARDEN_REPORT_H_

#include <chrono>
#include <string>
#include <string_view>

#include "phase_warden/checker.h"

namespace phase_warden {

// `basename` shortens file subjects to their last path component.
std::string FormatViolation(const Violation& v, bool basename = false);
std::string FormatTextReport(const ViolationReport& report,
                             bool basename = false);

std::string ReportToJson(const ViolationReport& report);
// Throws Error on malformed input.
ViolationReport ReportFromJson(std::string_view json);

// RFC 3339 UTC with nanoseconds, e.g. 2026-01-02T03:04:05.000000006Z.
std::string FormatTimestamp(std::chrono::system_clock::time_point t);
std::chrono::system_clock::time_point ParseTimestamp(std::string_view s);

}  // namespace phase_warden

#endif  // PHASE_WARDEN_REPORT_H_

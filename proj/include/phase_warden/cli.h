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

// Command-line front end. Exit codes: 0 clean, 1 violations or denied
// attempts, 2 usage/spec/project/privilege errors, 3 backend or internal
// errors.

#ifndef PHASE_WARDEN_CLI_H_
#define PHASE_WARDEN_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace phase_warden::cli {

inline constexpr int kExitClean = 0;
inline constexpr int kExitViolations = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInternal = 3;

// `args` excludes the program name.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace phase_warden::cli

#endif  // PHASE_WARDEN_CLI_H_

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

// The tool's work directory inside a project and the per-project run lock.

#ifndef PHASE_WARDEN_WORKSPACE_H_
#define PHASE_WARDEN_WORKSPACE_H_

#include <filesystem>
#include <optional>
#include <string>

namespace phase_warden {

inline constexpr char kDefaultWorkDirName[] = ".phase-warden";
inline constexpr char kWorkDirEnvVar[] = "PHASE_WARDEN_WORKDIR";

// `override_dir` wins, then $PHASE_WARDEN_WORKDIR, then `<root>/.phase-warden`.
// Relative values are taken relative to `root`.
std::filesystem::path ResolveWorkDir(
    const std::filesystem::path& root,
    const std::optional<std::filesystem::path>& override_dir = std::nullopt);

// The exclude pattern hiding `work_dir` from monitoring, or nullopt when the
// work directory lies outside `root`.
std::optional<std::string> WorkDirExclude(const std::filesystem::path& root,
                                          const std::filesystem::path& work_dir);

// Exclusive advisory lock on `<work_dir>/lock`, held for the object's
// lifetime. Throws LockContention when another run holds it.
class ProjectLock {
 public:
  static ProjectLock Acquire(const std::filesystem::path& work_dir);

  ProjectLock(ProjectLock&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  ProjectLock& operator=(ProjectLock&& other) noexcept;
  ProjectLock(const ProjectLock&) = delete;
  ProjectLock& operator=(const ProjectLock&) = delete;
  ~ProjectLock();

 private:
  explicit ProjectLock(int fd) : fd_(fd) {}
  int fd_ = -1;
};

}  // namespace phase_warden

#endif  // PHASE_WARDEN_WORKSPACE_H_

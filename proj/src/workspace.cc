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

#include "phase_warden/workspace.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <system_error>

#include "phase_warden/error.h"
#include "phase_warden/glob.h"

namespace phase_warden {

std::filesystem::path ResolveWorkDir(
    const std::filesystem::path& root,
    const std::optional<std::filesystem::path>& override_dir) {
  std::filesystem::path dir;
  if (override_dir && !override_dir->empty()) {
    dir = *override_dir;
  } else if (const char* env = std::getenv(kWorkDirEnvVar); env && *env) {
    dir = env;
  } else {
    dir = kDefaultWorkDirName;
  }
  if (dir.is_relative()) dir = root / dir;
  return dir.lexically_normal();
}

std::optional<std::string> WorkDirExclude(
    const std::filesystem::path& root, const std::filesystem::path& work_dir) {
  std::error_code ec;
  std::filesystem::path abs_root = std::filesystem::absolute(root, ec);
  std::filesystem::path abs_work = std::filesystem::absolute(work_dir, ec);
  std::filesystem::path rel =
      abs_work.lexically_normal().lexically_relative(abs_root.lexically_normal());
  std::optional<std::string> norm = NormalizeRelativePath(rel.string());
  if (!norm || *norm == ".") return std::nullopt;
  return *norm + "/";
}

ProjectLock ProjectLock::Acquire(const std::filesystem::path& work_dir) {
  std::error_code ec;
  std::filesystem::create_directories(work_dir, ec);
  const std::filesystem::path path = work_dir / "lock";
  int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw ProjectError("cannot open lock file '" + path.string() +
                       "': " + std::strerror(errno));
  }
  if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
    const int err = errno;
    ::close(fd);
    if (err == EWOULDBLOCK) {
      throw LockContention("another phase-warden run holds '" + path.string() +
                           "'");
    }
    throw ProjectError("cannot lock '" + path.string() +
                       "': " + std::strerror(err));
  }
  return ProjectLock(fd);
}

ProjectLock& ProjectLock::operator=(ProjectLock&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

ProjectLock::~ProjectLock() {
  if (fd_ >= 0) ::close(fd_);
}

}  // namespace phase_warden

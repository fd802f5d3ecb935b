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

// Stat-snapshot backend: metadata of every entry under a root, captured
// before and after a phase and compared.

#ifndef PHASE_WARDEN_SNAPSHOT_H_
#define PHASE_WARDEN_SNAPSHOT_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "phase_warden/access.h"
#include "phase_warden/glob.h"

namespace phase_warden {

enum class EntryKind { kRegular, kDirectory, kSymlink, kOther };

std::string_view ToString(EntryKind kind);

struct FileStatRecord {
  std::string rel_path;
  EntryKind kind = EntryKind::kRegular;
  std::uint64_t size = 0;
  std::int64_t mtime_ns = 0;
  std::int64_t atime_ns = 0;
  std::int64_t ctime_ns = 0;
  bool exists = true;

  friend bool operator==(const FileStatRecord&, const FileStatRecord&) = default;
};

struct FsSnapshot {
  std::filesystem::path root;
  std::chrono::system_clock::time_point taken_at;
  std::map<std::string, FileStatRecord> records;
  bool atime_reliable = true;
  std::vector<std::string> warnings;  // unreadable subtrees
};

// Metadata-only walk of `root`. Throws ProjectError when root is missing.
FsSnapshot TakeSnapshot(const std::filesystem::path& root,
                        const std::vector<std::string>& excludes,
                        bool atime_reliable = true);

// Compares two snapshots of the same root. Per path, first match wins:
//   absent -> present             create   (existence_diff)
//   present -> absent             delete   (existence_diff)
//   mtime or size changed         write    (mtime_diff / size_diff)
//   atime strictly later          read     (atime_diff; regular files only,
//                                           and only if before.atime_reliable)
//   ctime-only change             touch    (ctime_diff)
// Directories only ever produce create/delete. Throws Error on mismatched
// roots.
std::vector<AccessRecord> DiffSnapshots(const FsSnapshot& before,
                                        const FsSnapshot& after,
                                        std::string_view phase);

struct AtimeProbe {
  bool reliable = false;
  std::string reason;
};

// Creates a scratch file in `dir`, reads it after sleeping past the
// timestamp granularity, and reports whether its access time advanced.
// Throws ProjectError when `dir` is not writable.
AtimeProbe ProbeAtimeReliability(const std::filesystem::path& dir);

// Resets the access time of every regular file whose atime is later than its
// mtime back to its mtime, so that the next read advances it even under
// `relatime` mount semantics. Returns the number of files touched.
std::size_t PrimeAccessTimes(const std::filesystem::path& root,
                             const std::vector<std::string>& excludes);

}  // namespace phase_warden

#endif  // PHASE_WARDEN_SNAPSHOT_H_

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

#include "phase_warden/snapshot.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <string>
#include <system_error>
#include <thread>

#include "phase_warden/error.h"
#include "phase_warden/tree_walk.h"

namespace phase_warden {
namespace {

constexpr std::int64_t kNanosPerSecond = 1'000'000'000;

std::int64_t ToNanos(const struct timespec& ts) {
  return static_cast<std::int64_t>(ts.tv_sec) * kNanosPerSecond + ts.tv_nsec;
}

struct timespec FromNanos(std::int64_t ns) {
  struct timespec ts {};
  ts.tv_sec = static_cast<time_t>(ns / kNanosPerSecond);
  ts.tv_nsec = static_cast<long>(ns % kNanosPerSecond);
  if (ts.tv_nsec < 0) {
    ts.tv_nsec += kNanosPerSecond;
    ts.tv_sec -= 1;
  }
  return ts;
}

EntryKind KindOf(mode_t mode) {
  if (S_ISREG(mode)) return EntryKind::kRegular;
  if (S_ISDIR(mode)) return EntryKind::kDirectory;
  if (S_ISLNK(mode)) return EntryKind::kSymlink;
  return EntryKind::kOther;
}

std::string Span(std::int64_t a, std::int64_t b) {
  return std::to_string(a) + " -> " + std::to_string(b);
}

bool DirectoryWritable(const std::filesystem::path& dir) {
  return ::access(dir.c_str(), W_OK | X_OK) == 0;
}

}  // namespace

std::string_view ToString(EntryKind kind) {
  switch (kind) {
    case EntryKind::kRegular: return "regular";
    case EntryKind::kDirectory: return "directory";
    case EntryKind::kSymlink: return "symlink";
    case EntryKind::kOther: return "other";
  }
  return "?";
}

FsSnapshot TakeSnapshot(const std::filesystem::path& root,
                        const std::vector<std::string>& excludes,
                        bool atime_reliable) {
  struct stat root_st {};
  if (::stat(root.c_str(), &root_st) != 0 || !S_ISDIR(root_st.st_mode)) {
    throw ProjectError("snapshot root '" + root.string() +
                       "' does not exist or is not a directory");
  }
  FsSnapshot snap;
  snap.root = root;
  snap.taken_at = std::chrono::system_clock::now();
  snap.atime_reliable = atime_reliable;
  WalkTree(
      root, CompilePathGlobs(excludes),
      [&snap](const std::string& rel, const struct stat& st) {
        FileStatRecord rec;
        rec.rel_path = rel;
        rec.kind = KindOf(st.st_mode);
        rec.size = static_cast<std::uint64_t>(st.st_size);
        rec.mtime_ns = ToNanos(st.st_mtim);
        rec.atime_ns = ToNanos(st.st_atim);
        rec.ctime_ns = ToNanos(st.st_ctim);
        snap.records.emplace(rel, std::move(rec));
      },
      &snap.warnings);
  return snap;
}

std::vector<AccessRecord> DiffSnapshots(const FsSnapshot& before,
                                        const FsSnapshot& after,
                                        std::string_view phase) {
  if (before.root != after.root) {
    throw Error("cannot diff snapshots of different roots ('" +
                before.root.string() + "' vs '" + after.root.string() + "')");
  }
  std::vector<AccessRecord> out;
  auto emit = [&](const std::string& path, AccessMode mode, Evidence ev,
                  std::string detail) {
    out.push_back(AccessRecord{std::string(phase), path, mode, ev,
                               std::move(detail), false});
  };

  auto b = before.records.begin();
  auto a = after.records.begin();
  // Both maps are sorted by path; merge-walk them.
  while (b != before.records.end() || a != after.records.end()) {
    if (a == after.records.end() ||
        (b != before.records.end() && b->first < a->first)) {
      emit(b->first, AccessMode::kDelete, Evidence::kExistenceDiff,
           "exists true -> false");
      ++b;
      continue;
    }
    if (b == before.records.end() || a->first < b->first) {
      emit(a->first, AccessMode::kCreate, Evidence::kExistenceDiff,
           "exists false -> true");
      ++a;
      continue;
    }
    const FileStatRecord& was = b->second;
    const FileStatRecord& now = a->second;
    if (was.kind != now.kind) {
      emit(now.rel_path, AccessMode::kWrite, Evidence::kMtimeDiff,
           std::string("kind ") + std::string(ToString(was.kind)) + " -> " +
               std::string(ToString(now.kind)));
    } else if (now.kind == EntryKind::kDirectory) {
      // Directory timestamps churn with every traversal and entry change.
    } else if (was.mtime_ns != now.mtime_ns) {
      emit(now.rel_path, AccessMode::kWrite, Evidence::kMtimeDiff,
           "mtime " + Span(was.mtime_ns, now.mtime_ns));
    } else if (was.size != now.size) {
      emit(now.rel_path, AccessMode::kWrite, Evidence::kSizeDiff,
           "size " + Span(static_cast<std::int64_t>(was.size),
                          static_cast<std::int64_t>(now.size)));
    } else if (now.kind == EntryKind::kRegular && before.atime_reliable &&
               now.atime_ns > was.atime_ns) {
      emit(now.rel_path, AccessMode::kRead, Evidence::kAtimeDiff,
           "atime " + Span(was.atime_ns, now.atime_ns));
    } else if (was.ctime_ns != now.ctime_ns) {
      emit(now.rel_path, AccessMode::kTouch, Evidence::kCtimeDiff,
           "ctime " + Span(was.ctime_ns, now.ctime_ns));
    }
    ++a;
    ++b;
  }
  return out;
}

AtimeProbe ProbeAtimeReliability(const std::filesystem::path& dir) {
  if (!DirectoryWritable(dir)) {
    throw ProjectError("cannot probe access times: '" + dir.string() +
                       "' is not writable");
  }
  std::string templ = (dir / ".phase-warden-atime-XXXXXX").string();
  int fd = ::mkstemp(templ.data());
  if (fd < 0) {
    throw ProjectError("cannot create probe file in '" + dir.string() +
                       "': " + std::strerror(errno));
  }
  const std::string path = templ;
  struct Cleanup {
    const std::string& path;
    ~Cleanup() { ::unlink(path.c_str()); }
  } cleanup{path};

  static constexpr char kContent[] = "phase-warden atime probe\n";
  if (::write(fd, kContent, sizeof(kContent) - 1) < 0) {
    ::close(fd);
    throw ProjectError("cannot write probe file: " +
                       std::string(std::strerror(errno)));
  }
  ::close(fd);

  struct stat st0 {};
  ::stat(path.c_str(), &st0);
  // Whole-second timestamps mean a coarse filesystem; wait out a full tick.
  const bool coarse = st0.st_mtim.tv_nsec == 0 && st0.st_atim.tv_nsec == 0;
  std::this_thread::sleep_for(coarse ? std::chrono::milliseconds(1100)
                                     : std::chrono::milliseconds(25));

  fd = ::open(path.c_str(), O_RDONLY);
  if (fd < 0) {
    return {false, std::string("cannot reopen probe file: ") +
                       std::strerror(errno)};
  }
  char buf[64];
  [[maybe_unused]] ssize_t n = ::read(fd, buf, sizeof(buf));
  ::close(fd);

  struct stat st1 {};
  ::stat(path.c_str(), &st1);
  const std::int64_t delta = ToNanos(st1.st_atim) - ToNanos(st0.st_atim);
  if (delta > 0) {
    return {true, "atime advanced by " + std::to_string(delta) + " ns"};
  }
  return {false, "atime unchanged after read"};
}

std::size_t PrimeAccessTimes(const std::filesystem::path& root,
                             const std::vector<std::string>& excludes) {
  std::size_t touched = 0;
  const std::string base = root.string();
  WalkTree(
      root, CompilePathGlobs(excludes),
      [&](const std::string& rel, const struct stat& st) {
        if (!S_ISREG(st.st_mode)) return;
        const std::int64_t mtime = ToNanos(st.st_mtim);
        if (ToNanos(st.st_atim) < mtime) return;
        // One second below mtime: any later read lands strictly above it,
        // and relatime sees atime <= mtime and updates.
        struct timespec times[2] = {FromNanos(mtime - kNanosPerSecond),
                                    {0, UTIME_OMIT}};
        const std::string abs = base + "/" + rel;
        if (::utimensat(AT_FDCWD, abs.c_str(), times, AT_SYMLINK_NOFOLLOW) ==
            0) {
          ++touched;
        }
      },
      nullptr);
  return touched;
}

}  // namespace phase_warden

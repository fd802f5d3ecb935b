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

#include "phase_warden/tracer.h"

#include <fcntl.h>
#include <sys/ptrace.h>
#include <sys/stat.h>
#include <sys/syscall.h>
#include <sys/uio.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <optional>
#include <set>
#include <unordered_map>
#include <utility>

#include "phase_warden/error.h"
#include "phase_warden/glob.h"

namespace phase_warden {
namespace {

constexpr std::size_t kMaxPathBytes = 16 * 4096;
constexpr std::size_t kMaxArgs = 8192;

enum class Op {
  kOpen,
  kUnlink,
  kRmdir,
  kRename,
  kMkdir,
  kLink,  // link and symlink: only the new name matters
  kTruncate,
  kExec,
};

struct Pending {
  Op op = Op::kOpen;
  std::string syscall;
  std::string path;    // absolute, lexically normalized
  std::string path2;   // rename/link destination
  std::uint64_t flags = 0;
  bool existed = false;   // path, for opens that may create
  bool existed2 = false;  // path2
  std::vector<std::string> argv;
  std::string cwd;
};

std::optional<std::string> ReadLink(const std::string& path) {
  char buf[4096];
  ssize_t n = ::readlink(path.c_str(), buf, sizeof(buf));
  if (n < 0) return std::nullopt;
  return std::string(buf, static_cast<std::size_t>(n));
}

bool ReadMemory(pid_t pid, std::uint64_t addr, void* out, std::size_t len) {
  struct iovec local {out, len};
  struct iovec remote {reinterpret_cast<void*>(addr), len};
  ssize_t n = ::process_vm_readv(pid, &local, 1, &remote, 1, 0);
  if (n == static_cast<ssize_t>(len)) return true;
  // Fall back to word-sized peeks.
  auto* dst = static_cast<unsigned char*>(out);
  for (std::size_t off = 0; off < len; off += sizeof(long)) {
    errno = 0;
    long word = ::ptrace(PTRACE_PEEKDATA, pid,
                         reinterpret_cast<void*>(addr + off), nullptr);
    if (errno != 0) return false;
    std::memcpy(dst + off, &word, std::min(sizeof(long), len - off));
  }
  return true;
}

std::optional<std::string> ReadString(pid_t pid, std::uint64_t addr) {
  if (addr == 0) return std::nullopt;
  std::string out;
  constexpr std::uint64_t kPage = 4096;
  while (out.size() < kMaxPathBytes) {
    // Never read across a page boundary in one go; the next page may be
    // unmapped.
    std::size_t chunk = kPage - (addr % kPage);
    char buf[kPage];
    if (!ReadMemory(pid, addr, buf, chunk)) return std::nullopt;
    const void* nul = std::memchr(buf, '\0', chunk);
    if (nul != nullptr) {
      out.append(buf, static_cast<const char*>(nul) - buf);
      return out;
    }
    out.append(buf, chunk);
    addr += chunk;
  }
  return std::nullopt;
}

std::vector<std::string> ReadArgv(pid_t pid, std::uint64_t addr) {
  std::vector<std::string> argv;
  if (addr == 0) return argv;
  for (std::size_t i = 0; i < kMaxArgs; ++i) {
    std::uint64_t ptr = 0;
    if (!ReadMemory(pid, addr + i * sizeof(ptr), &ptr, sizeof(ptr)) ||
        ptr == 0) {
      break;
    }
    std::optional<std::string> arg = ReadString(pid, ptr);
    if (!arg) break;
    argv.push_back(std::move(*arg));
  }
  return argv;
}

std::int64_t NowNanos() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

bool Exists(const std::string& path) {
  struct stat st {};
  return ::lstat(path.c_str(), &st) == 0;
}

bool IsDirectory(const std::string& path) {
  struct stat st {};
  return ::stat(path.c_str(), &st) == 0 && S_ISDIR(st.st_mode);
}

class Tracer {
 public:
  Tracer(std::filesystem::path root, std::string phase,
         const std::vector<std::string>& excludes)
      : root_(root.string()),
        phase_(std::move(phase)),
        excludes_(CompilePathGlobs(excludes)) {}

  TraceResult Run(const ShellCommand& command);

 private:
  struct Place {
    std::string path;
    bool external = false;
    bool skip = false;  // excluded, or the project root itself
  };

  std::optional<std::string> Resolve(pid_t pid, std::int64_t dirfd,
                                     std::uint64_t addr);
  Place Classify(const std::string& abs) const;
  void Emit(const std::string& abs, AccessMode mode, const std::string& what);
  void Fail(const std::string& abs, const std::string& syscall, int err);

  void OnSyscall(pid_t pid);
  void OnEntry(pid_t pid, std::uint64_t nr, const std::uint64_t* args);
  void OnExit(pid_t pid, const Pending& p, std::int64_t rval, bool is_error);
  void OnExec(pid_t pid);

  std::string root_;
  std::string phase_;
  std::vector<PathGlob> excludes_;
  pid_t root_pid_ = -1;
  bool root_exec_seen_ = false;
  std::uint32_t arch_ = 0;
  std::unordered_map<pid_t, Pending> pending_;
  std::set<std::pair<std::string, AccessMode>> seen_;
  std::set<std::pair<std::string, std::string>> seen_failures_;
  TraceResult result_;
};

std::optional<std::string> Tracer::Resolve(pid_t pid, std::int64_t dirfd,
                                           std::uint64_t addr) {
  std::optional<std::string> raw = ReadString(pid, addr);
  if (!raw || raw->empty()) return std::nullopt;
  std::filesystem::path p(*raw);
  if (!p.is_absolute()) {
    std::string proc = "/proc/" + std::to_string(pid);
    std::optional<std::string> base =
        static_cast<int>(dirfd) == AT_FDCWD
            ? ReadLink(proc + "/cwd")
            : ReadLink(proc + "/fd/" + std::to_string(static_cast<int>(dirfd)));
    if (!base) return std::nullopt;
    p = std::filesystem::path(*base) / p;
  }
  std::string out = p.lexically_normal().string();
  while (out.size() > 1 && out.back() == '/') out.pop_back();
  return out;
}

Tracer::Place Tracer::Classify(const std::string& abs) const {
  Place place;
  if (abs == root_) {
    place.skip = true;
    return place;
  }
  if (abs.size() > root_.size() && abs.compare(0, root_.size(), root_) == 0 &&
      abs[root_.size()] == '/') {
    place.path = abs.substr(root_.size() + 1);
    // An excluded ancestor hides its whole subtree, as in the tree walk.
    std::string prefix;
    std::size_t pos = 0;
    while (pos != std::string::npos) {
      std::size_t slash = place.path.find('/', pos);
      prefix = place.path.substr(0, slash);
      if (MatchesAnyPathGlob(excludes_, prefix)) {
        place.skip = true;
        break;
      }
      pos = slash == std::string::npos ? slash : slash + 1;
    }
    return place;
  }
  place.path = abs;
  place.external = true;
  return place;
}

void Tracer::Emit(const std::string& abs, AccessMode mode,
                  const std::string& what) {
  Place place = Classify(abs);
  if (place.skip) return;
  if (!seen_.emplace(place.path, mode).second) return;
  result_.accesses.push_back(AccessRecord{phase_, place.path, mode,
                                          Evidence::kTrace, what,
                                          place.external});
}

void Tracer::Fail(const std::string& abs, const std::string& syscall,
                  int err) {
  Place place = Classify(abs);
  if (place.skip) return;
  if (!seen_failures_.emplace(place.path, syscall).second) return;
  result_.failures.push_back(
      FailedAccess{place.path, syscall, err, place.external});
}

void Tracer::OnSyscall(pid_t pid) {
  struct __ptrace_syscall_info info {};
  long n = ::ptrace(PTRACE_GET_SYSCALL_INFO, pid, sizeof(info), &info);
  if (n <= 0) return;
  if (info.op == PTRACE_SYSCALL_INFO_ENTRY) {
    if (arch_ == 0) arch_ = info.arch;
    pending_.erase(pid);
    // Syscall numbers are per-architecture; compat-mode tasks are skipped.
    if (info.arch != arch_) return;
    OnEntry(pid, info.entry.nr, info.entry.args);
  } else if (info.op == PTRACE_SYSCALL_INFO_EXIT) {
    auto it = pending_.find(pid);
    if (it == pending_.end()) return;
    Pending p = std::move(it->second);
    pending_.erase(it);
    OnExit(pid, p, info.exit.rval, info.exit.is_error != 0);
  }
}

void Tracer::OnEntry(pid_t pid, std::uint64_t nr, const std::uint64_t* a) {
  const std::int64_t kCwd = AT_FDCWD;
  auto fd = [](std::uint64_t v) { return static_cast<std::int64_t>(static_cast<int>(v)); };
  Pending p;
  std::optional<std::string> path, path2;
  switch (nr) {
#ifdef SYS_open
    case SYS_open:
      p.op = Op::kOpen, p.syscall = "open", p.flags = a[1];
      path = Resolve(pid, kCwd, a[0]);
      break;
#endif
    case SYS_openat:
      p.op = Op::kOpen, p.syscall = "openat", p.flags = a[2];
      path = Resolve(pid, fd(a[0]), a[1]);
      break;
#ifdef SYS_openat2
    case SYS_openat2: {
      std::uint64_t flags = 0;
      if (!ReadMemory(pid, a[2], &flags, sizeof(flags))) return;
      p.op = Op::kOpen, p.syscall = "openat2", p.flags = flags;
      path = Resolve(pid, fd(a[0]), a[1]);
      break;
    }
#endif
#ifdef SYS_creat
    case SYS_creat:
      p.op = Op::kOpen, p.syscall = "creat";
      p.flags = O_CREAT | O_WRONLY | O_TRUNC;
      path = Resolve(pid, kCwd, a[0]);
      break;
#endif
#ifdef SYS_unlink
    case SYS_unlink:
      p.op = Op::kUnlink, p.syscall = "unlink";
      path = Resolve(pid, kCwd, a[0]);
      break;
#endif
    case SYS_unlinkat:
      p.op = (a[2] & AT_REMOVEDIR) ? Op::kRmdir : Op::kUnlink;
      p.syscall = "unlinkat";
      path = Resolve(pid, fd(a[0]), a[1]);
      break;
#ifdef SYS_rmdir
    case SYS_rmdir:
      p.op = Op::kRmdir, p.syscall = "rmdir";
      path = Resolve(pid, kCwd, a[0]);
      break;
#endif
#ifdef SYS_rename
    case SYS_rename:
      p.op = Op::kRename, p.syscall = "rename";
      path = Resolve(pid, kCwd, a[0]);
      path2 = Resolve(pid, kCwd, a[1]);
      break;
#endif
    case SYS_renameat:
#ifdef SYS_renameat2
    case SYS_renameat2:
#endif
      p.op = Op::kRename, p.syscall = "renameat";
      path = Resolve(pid, fd(a[0]), a[1]);
      path2 = Resolve(pid, fd(a[2]), a[3]);
      break;
#ifdef SYS_mkdir
    case SYS_mkdir:
      p.op = Op::kMkdir, p.syscall = "mkdir";
      path = Resolve(pid, kCwd, a[0]);
      break;
#endif
    case SYS_mkdirat:
      p.op = Op::kMkdir, p.syscall = "mkdirat";
      path = Resolve(pid, fd(a[0]), a[1]);
      break;
#ifdef SYS_link
    case SYS_link:
      p.op = Op::kLink, p.syscall = "link";
      path = Resolve(pid, kCwd, a[1]);
      break;
#endif
    case SYS_linkat:
      p.op = Op::kLink, p.syscall = "linkat";
      path = Resolve(pid, fd(a[2]), a[3]);
      break;
#ifdef SYS_symlink
    case SYS_symlink:
      p.op = Op::kLink, p.syscall = "symlink";
      path = Resolve(pid, kCwd, a[1]);
      break;
#endif
    case SYS_symlinkat:
      p.op = Op::kLink, p.syscall = "symlinkat";
      path = Resolve(pid, fd(a[1]), a[2]);
      break;
    case SYS_truncate:
      p.op = Op::kTruncate, p.syscall = "truncate";
      path = Resolve(pid, kCwd, a[0]);
      break;
    case SYS_execve:
      p.op = Op::kExec, p.syscall = "execve";
      path = Resolve(pid, kCwd, a[0]);
      p.argv = ReadArgv(pid, a[1]);
      break;
#ifdef SYS_execveat
    case SYS_execveat:
      p.op = Op::kExec, p.syscall = "execveat";
      path = Resolve(pid, fd(a[0]), a[1]);
      p.argv = ReadArgv(pid, a[2]);
      break;
#endif
    default:
      return;
  }
  if (!path) return;
  p.path = std::move(*path);
  if (path2) p.path2 = std::move(*path2);
  if (p.op == Op::kOpen && (p.flags & O_CREAT)) p.existed = Exists(p.path);
  if (p.op == Op::kRename && !p.path2.empty()) p.existed2 = Exists(p.path2);
  if (p.op == Op::kExec) {
    p.cwd = ReadLink("/proc/" + std::to_string(pid) + "/cwd").value_or("");
  }
  pending_[pid] = std::move(p);
}

void Tracer::OnExit(pid_t, const Pending& p, std::int64_t rval,
                    bool is_error) {
  if (is_error) {
    if (rval == -EACCES || rval == -EPERM) {
      Fail(p.path, p.syscall, static_cast<int>(-rval));
    }
    return;
  }
  switch (p.op) {
    case Op::kOpen: {
      if (p.flags & O_PATH) return;
      if ((p.flags & O_CREAT) && !p.existed) {
        Emit(p.path, AccessMode::kCreate, p.syscall + " O_CREAT");
        return;
      }
      if (IsDirectory(p.path)) return;
      const std::uint64_t acc = p.flags & O_ACCMODE;
      const bool writes = acc != O_RDONLY || (p.flags & O_TRUNC);
      if (acc != O_WRONLY) Emit(p.path, AccessMode::kRead, p.syscall);
      if (writes) Emit(p.path, AccessMode::kWrite, p.syscall);
      return;
    }
    case Op::kUnlink:
    case Op::kRmdir:
      Emit(p.path, AccessMode::kDelete, p.syscall);
      return;
    case Op::kRename:
      Emit(p.path, AccessMode::kDelete, p.syscall + " (source)");
      if (!p.path2.empty()) {
        Emit(p.path2, p.existed2 ? AccessMode::kWrite : AccessMode::kCreate,
             p.syscall + " (destination)");
      }
      return;
    case Op::kMkdir:
    case Op::kLink:
      Emit(p.path, AccessMode::kCreate, p.syscall);
      return;
    case Op::kTruncate:
      Emit(p.path, AccessMode::kWrite, p.syscall);
      return;
    case Op::kExec:
      return;  // recorded at the exec event
  }
}

void Tracer::OnExec(pid_t pid) {
  unsigned long former = 0;
  ::ptrace(PTRACE_GETEVENTMSG, pid, nullptr, &former);
  auto it = pending_.find(static_cast<pid_t>(former));
  if (it == pending_.end()) it = pending_.find(pid);
  if (it == pending_.end() || it->second.op != Op::kExec) return;
  Pending p = std::move(it->second);
  pending_.erase(it);
  if (pid == root_pid_ && !root_exec_seen_) {
    root_exec_seen_ = true;
    return;
  }
  ExecRecord rec;
  rec.argv = p.argv;
  if (rec.argv.empty()) rec.argv.push_back(p.path);
  rec.program = std::filesystem::path(rec.argv[0]).filename().string();
  rec.cwd = p.cwd;
  rec.timestamp_ns = NowNanos();
  result_.execs.push_back(std::move(rec));
  Emit(p.path, AccessMode::kRead, p.syscall);
}

TraceResult Tracer::Run(const ShellCommand& command) {
  root_pid_ = SpawnShell(command, true);
  int status = 0;
  if (::waitpid(root_pid_, &status, __WALL) < 0 || !WIFSTOPPED(status)) {
    if (!WIFEXITED(status) && !WIFSIGNALED(status)) {
      ::kill(root_pid_, SIGKILL);
      ::waitpid(root_pid_, &status, __WALL);
    }
    throw BackendUnavailable("traced shell did not stop for the tracer");
  }
  const long options = PTRACE_O_TRACESYSGOOD | PTRACE_O_TRACEFORK |
                       PTRACE_O_TRACEVFORK | PTRACE_O_TRACECLONE |
                       PTRACE_O_TRACEEXEC | PTRACE_O_EXITKILL;
  if (::ptrace(PTRACE_SETOPTIONS, root_pid_, nullptr, options) != 0) {
    const int err = errno;
    ::kill(root_pid_, SIGKILL);
    ::waitpid(root_pid_, &status, __WALL);
    throw BackendUnavailable(std::string("cannot set trace options: ") +
                             std::strerror(err));
  }
  std::set<pid_t> known{root_pid_};
  ::ptrace(PTRACE_SYSCALL, root_pid_, nullptr, nullptr);

  while (true) {
    pid_t pid = ::waitpid(-1, &status, __WALL);
    if (pid < 0) {
      if (errno == EINTR) continue;
      break;  // ECHILD: every tracee is gone
    }
    if (WIFEXITED(status) || WIFSIGNALED(status)) {
      if (pid == root_pid_) result_.exit = DecodeWaitStatus(status);
      pending_.erase(pid);
      continue;
    }
    if (!WIFSTOPPED(status)) continue;
    const int sig = WSTOPSIG(status);
    const int event = status >> 16;
    int inject = 0;
    if (known.insert(pid).second && sig == SIGSTOP && event == 0) {
      // Initial stop of a newly attached child.
    } else if (sig == (SIGTRAP | 0x80)) {
      OnSyscall(pid);
    } else if (event != 0) {
      if (event == PTRACE_EVENT_EXEC) OnExec(pid);
    } else {
      inject = sig;
    }
    ::ptrace(PTRACE_SYSCALL, pid, nullptr, reinterpret_cast<void*>(
                                               static_cast<long>(inject)));
  }
  return std::move(result_);
}

}  // namespace

const TraceProbe& ProbeTracing() {
  static const TraceProbe probe = [] {
    pid_t pid = ::fork();
    if (pid < 0) return TraceProbe{false, "fork failed"};
    if (pid == 0) {
      if (::ptrace(PTRACE_TRACEME, 0, nullptr, nullptr) != 0) _exit(1);
      ::raise(SIGSTOP);
      ::syscall(SYS_getppid);
      _exit(0);
    }
    int status = 0;
    ::waitpid(pid, &status, __WALL);
    if (!WIFSTOPPED(status)) {
      return TraceProbe{false, "ptrace is not permitted for this process"};
    }
    TraceProbe result{false, "syscall stops unavailable"};
    if (::ptrace(PTRACE_SETOPTIONS, pid, nullptr, PTRACE_O_TRACESYSGOOD) == 0 &&
        ::ptrace(PTRACE_SYSCALL, pid, nullptr, nullptr) == 0 &&
        ::waitpid(pid, &status, __WALL) == pid && WIFSTOPPED(status) &&
        WSTOPSIG(status) == (SIGTRAP | 0x80)) {
      struct __ptrace_syscall_info info {};
      if (::ptrace(PTRACE_GET_SYSCALL_INFO, pid, sizeof(info), &info) > 0 &&
          info.op == PTRACE_SYSCALL_INFO_ENTRY) {
        result = TraceProbe{true, "ptrace syscall tracing available"};
      } else {
        result = TraceProbe{false, "PTRACE_GET_SYSCALL_INFO unsupported"};
      }
    }
    ::kill(pid, SIGKILL);
    while (::waitpid(pid, &status, __WALL) == pid && !WIFEXITED(status) &&
           !WIFSIGNALED(status)) {
    }
    return result;
  }();
  return probe;
}

TraceResult TraceRun(const ShellCommand& command,
                     const std::filesystem::path& project_root,
                     std::string_view phase,
                     const std::vector<std::string>& excludes) {
  const TraceProbe& probe = ProbeTracing();
  if (!probe.available) throw BackendUnavailable(probe.reason);
  std::error_code ec;
  std::filesystem::path root =
      std::filesystem::weakly_canonical(project_root, ec);
  if (ec) root = project_root;
  Tracer tracer(root, std::string(phase), excludes);
  return tracer.Run(command);
}

}  // namespace phase_warden

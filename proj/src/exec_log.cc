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

#include "phase_warden/exec_log.h"

#include <dirent.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <system_error>

#include "phase_warden/error.h"

namespace phase_warden {
namespace {

constexpr char kDispatcherName[] = ".dispatch";

// The dispatcher finds the real program by walking PATH past the shim
// directory, so programs started by the real program are shimmed too.
constexpr char kDispatcher[] = R"SH(#!/bin/bash
__pw_name=${0##*/}
if [[ -n $PHASE_WARDEN_EXEC_LOG ]]; then
  __pw_fmt='%s\0%s\0%s\0'
  for __pw_a in "$@"; do __pw_fmt+='%s\0'; done
  builtin printf "$__pw_fmt\n" "$EPOCHREALTIME" "$PWD" "$__pw_name" "$@" \
    >> "$PHASE_WARDEN_EXEC_LOG" 2>/dev/null
fi
__pw_rest=$PATH:
while [[ -n $__pw_rest ]]; do
  __pw_d=${__pw_rest%%:*}
  __pw_rest=${__pw_rest#*:}
  [[ -z $__pw_d ]] && __pw_d=.
  [[ $__pw_d -ef $PHASE_WARDEN_SHIM_DIR ]] && continue
  if [[ -f $__pw_d/$__pw_name && -x $__pw_d/$__pw_name ]]; then
    exec -a "$__pw_name" "$__pw_d/$__pw_name" "$@"
  fi
done
echo "$__pw_name: command not found" >&2
exit 127
)SH";

std::int64_t ParseTimestamp(std::string_view s) {
  // $EPOCHREALTIME is seconds, a locale-dependent separator, microseconds.
  std::size_t sep = s.find_first_of(".,");
  std::int64_t secs = 0, micros = 0;
  std::string_view whole = s.substr(0, sep);
  std::from_chars(whole.data(), whole.data() + whole.size(), secs);
  if (sep != std::string_view::npos) {
    std::string frac(s.substr(sep + 1));
    frac.resize(6, '0');
    std::from_chars(frac.data(), frac.data() + frac.size(), micros);
  }
  return secs * 1'000'000'000 + micros * 1'000;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

ExecShim ExecShim::Install(const std::filesystem::path& dir,
                           std::string_view search_path) {
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  if (!std::filesystem::create_directories(dir, ec) || ec) {
    throw BackendUnavailable("cannot create shim directory '" + dir.string() +
                             "': " + ec.message());
  }
  const std::filesystem::path dispatcher = dir / kDispatcherName;
  {
    std::ofstream out(dispatcher, std::ios::binary);
    out << kDispatcher;
    if (!out) {
      throw BackendUnavailable("cannot write shim dispatcher '" +
                               dispatcher.string() + "'");
    }
  }
  if (::chmod(dispatcher.c_str(), 0755) != 0) {
    throw BackendUnavailable("cannot make shim dispatcher executable: " +
                             std::string(std::strerror(errno)));
  }

  std::set<std::string> names;
  std::size_t start = 0;
  while (start <= search_path.size()) {
    std::size_t colon = search_path.find(':', start);
    if (colon == std::string_view::npos) colon = search_path.size();
    std::string entry_dir(search_path.substr(start, colon - start));
    start = colon + 1;
    if (entry_dir.empty()) continue;
    DIR* d = ::opendir(entry_dir.c_str());
    if (d == nullptr) continue;
    while (struct dirent* ent = ::readdir(d)) {
      std::string name = ent->d_name;
      if (name == "." || name == ".." || names.contains(name)) continue;
      std::string full = entry_dir + "/" + name;
      struct stat st {};
      if (::stat(full.c_str(), &st) != 0 || !S_ISREG(st.st_mode) ||
          (st.st_mode & 0111) == 0) {
        continue;
      }
      names.insert(std::move(name));
    }
    ::closedir(d);
  }
  for (const std::string& name : names) {
    std::filesystem::path link = dir / name;
    if (::symlink(kDispatcherName, link.c_str()) != 0) {
      throw BackendUnavailable("cannot create shim '" + link.string() +
                               "': " + std::strerror(errno));
    }
  }
  return ExecShim(dir, names.size());
}

void ExecShim::Activate(EnvMap& env, const std::filesystem::path& log) const {
  auto it = env.find("PATH");
  std::string path = dir_.string();
  if (it != env.end() && !it->second.empty()) path += ":" + it->second;
  env["PATH"] = path;
  env[kShimDirVar] = dir_.string();
  env[kExecLogVar] = log.string();
}

ExecLog ParseExecLog(std::string_view bytes) {
  ExecLog log;
  static constexpr std::string_view kTerminator("\0\n", 2);
  std::size_t start = 0;
  while (start < bytes.size()) {
    std::size_t end = bytes.find(kTerminator, start);
    if (end == std::string_view::npos) {
      log.warnings.push_back("exec log: dropped truncated final record (" +
                             std::to_string(bytes.size() - start) + " bytes)");
      break;
    }
    std::string_view rec = bytes.substr(start, end + 1 - start);
    start = end + kTerminator.size();
    std::vector<std::string> fields;
    std::size_t f = 0;
    while (f < rec.size()) {
      std::size_t nul = rec.find('\0', f);
      fields.emplace_back(rec.substr(f, nul - f));
      f = nul + 1;
    }
    if (fields.size() < 3) {
      log.warnings.push_back("exec log: skipped malformed record");
      continue;
    }
    ExecRecord r;
    r.timestamp_ns = ParseTimestamp(fields[0]);
    r.cwd = fields[1];
    r.argv.assign(fields.begin() + 2, fields.end());
    r.program = std::filesystem::path(r.argv[0]).filename().string();
    log.records.push_back(std::move(r));
  }
  return log;
}

ExecLog ReadExecLog(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  return ParseExecLog(ReadFile(path));
}

ExecLogResult ExecLogRun(std::string_view command,
                         const std::filesystem::path& workdir,
                         const EnvMap& env,
                         const std::filesystem::path& scratch) {
  std::error_code ec;
  std::filesystem::create_directories(scratch, ec);
  auto path_it = env.find("PATH");
  ExecShim shim = ExecShim::Install(
      scratch / "shims", path_it == env.end() ? "" : path_it->second);
  const std::filesystem::path log_path = scratch / "exec.log";
  std::filesystem::remove(log_path, ec);
  EnvMap shimmed = env;
  shim.Activate(shimmed, log_path);

  ShellCommand cmd;
  cmd.script = BuildPhaseScript(command, PhaseScriptOptions{});
  cmd.cwd = workdir;
  cmd.env = std::move(shimmed);
  cmd.stdout_path = scratch / "stdout";
  cmd.stderr_path = scratch / "stderr";
  ExecLogResult result;
  result.exit = RunShell(cmd);
  ExecLog log = ReadExecLog(log_path);
  result.records = std::move(log.records);
  result.warnings = std::move(log.warnings);
  return result;
}

}  // namespace phase_warden

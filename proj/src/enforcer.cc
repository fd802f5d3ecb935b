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

#include "phase_warden/enforcer.h"

#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <system_error>

#include "json.hpp"
#include "phase_warden/error.h"
#include "phase_warden/glob.h"
#include "phase_warden/report.h"
#include "phase_warden/tree_walk.h"

namespace phase_warden {
namespace {

using Json = nlohmann::ordered_json;

// CAP_DAC_OVERRIDE, CAP_DAC_READ_SEARCH, CAP_FOWNER.
constexpr std::uint64_t kBypassCaps = (1u << 1) | (1u << 2) | (1u << 3);

std::size_t Depth(const std::string& rel) {
  return static_cast<std::size_t>(std::count(rel.begin(), rel.end(), '/'));
}

bool StripsAll(const ModeSet& modes) {
  return modes.IsAny() || modes.Contains(RuleMode::kRead);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

bool IsPathChar(char c) {
  return !(c == ':' || c == '\'' || c == '"' || c == '`' || c == ' ' ||
           c == '\t' || c == ',' || c == ';' || c == '(' || c == ')');
}

}  // namespace

PrivilegeStatus CheckPrivilege() {
  if (::geteuid() == 0) return {true, "running as root (euid 0)"};
  std::ifstream status("/proc/self/status");
  std::string line;
  while (std::getline(status, line)) {
    if (line.rfind("CapEff:", 0) != 0) continue;
    std::uint64_t caps = std::stoull(line.substr(7), nullptr, 16);
    if (caps & kBypassCaps) {
      return {true, "process holds capabilities that bypass file permissions"};
    }
  }
  return {false, "unprivileged"};
}

std::vector<MaskEntry> PlanMask(const std::filesystem::path& root,
                                const std::vector<PathRule>& deny,
                                const std::vector<std::string>& excludes) {
  std::vector<MaskEntry> entries;
  bool any_enabled = false;
  for (const PathRule& r : deny) any_enabled = any_enabled || r.enabled;
  if (!any_enabled) return entries;
  const std::string base = root.string();
  WalkTree(
      root, CompilePathGlobs(excludes),
      [&](const std::string& rel, const struct stat& st) {
        if (S_ISLNK(st.st_mode)) return;
        mode_t strip = 0;
        for (const PathRule& rule : deny) {
          if (!rule.enabled || !rule.glob.Matches(rel)) continue;
          strip |= StripsAll(rule.modes) ? 0777 : 0222;
        }
        if (strip == 0) return;
        MaskEntry e;
        e.abs_path = base + "/" + rel;
        e.rel_path = rel;
        e.original = st.st_mode & 07777;
        e.masked = e.original & ~strip;
        e.directory = S_ISDIR(st.st_mode);
        entries.push_back(std::move(e));
      },
      nullptr);
  // Contents before their directories: once a directory is masked its
  // entries can no longer be reached.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const MaskEntry& a, const MaskEntry& b) {
                     return Depth(a.rel_path) > Depth(b.rel_path);
                   });
  return entries;
}

MaskState ApplyMask(const std::filesystem::path& root,
                    const std::vector<PathRule>& deny, std::string_view phase,
                    const std::vector<std::string>& excludes) {
  PrivilegeStatus priv = CheckPrivilege();
  if (priv.privileged) {
    throw PrivilegeError("refusing to enforce: " + priv.reason +
                         ", so permission masks would not be honored");
  }
  MaskState state;
  state.phase_name = std::string(phase);
  std::vector<MaskEntry> plan = PlanMask(root, deny, excludes);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (::chmod(plan[i].abs_path.c_str(), plan[i].masked) != 0) {
      const std::string msg = "cannot mask '" + plan[i].rel_path +
                              "': " + std::strerror(errno);
      for (std::size_t j = i; j-- > 0;) {
        ::chmod(plan[j].abs_path.c_str(), plan[j].original);
      }
      throw MaskError(msg + " (mask rolled back)");
    }
  }
  state.entries = std::move(plan);
  state.applied_at = std::chrono::system_clock::now();
  return state;
}

std::vector<std::string> RestoreMask(MaskState& state) {
  if (state.restored) {
    throw MaskError("mask for phase '" + state.phase_name +
                    "' was already restored");
  }
  state.restored = true;
  std::vector<std::string> warnings;
  std::vector<std::string> errors;
  for (auto it = state.entries.rbegin(); it != state.entries.rend(); ++it) {
    if (::chmod(it->abs_path.c_str(), it->original) == 0) continue;
    const int err = errno;
    struct stat st {};
    if (err == ENOENT && ::lstat(it->abs_path.c_str(), &st) != 0) {
      warnings.push_back("'" + it->rel_path +
                         "' vanished while masked; nothing to restore");
    } else {
      errors.push_back("'" + it->rel_path + "': " + std::strerror(err));
    }
  }
  if (!errors.empty()) {
    std::string msg = "could not restore permissions of";
    for (const std::string& e : errors) msg += " " + e + ";";
    throw MaskError(msg);
  }
  return warnings;
}

std::string MaskStateToJson(const MaskState& state) {
  Json j;
  j["phase"] = state.phase_name;
  j["applied_at"] = FormatTimestamp(state.applied_at);
  j["restored"] = state.restored;
  Json entries = Json::array();
  for (const MaskEntry& e : state.entries) {
    entries.push_back({{"path", e.abs_path},
                       {"rel_path", e.rel_path},
                       {"original", e.original},
                       {"masked", e.masked},
                       {"directory", e.directory}});
  }
  j["entries"] = std::move(entries);
  return j.dump(2) + "\n";
}

MaskState MaskStateFromJson(std::string_view text) {
  try {
    Json j = Json::parse(text);
    MaskState state;
    state.phase_name = j.at("phase").get<std::string>();
    state.applied_at = ParseTimestamp(j.at("applied_at").get<std::string>());
    state.restored = j.at("restored").get<bool>();
    for (const Json& e : j.at("entries")) {
      state.entries.push_back(MaskEntry{e.at("path").get<std::string>(),
                                        e.at("rel_path").get<std::string>(),
                                        e.at("original").get<mode_t>(),
                                        e.at("masked").get<mode_t>(),
                                        e.at("directory").get<bool>()});
    }
    return state;
  } catch (const nlohmann::json::exception& e) {
    throw MaskError(std::string("malformed mask state: ") + e.what());
  }
}

void SaveMaskState(const MaskState& state, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << MaskStateToJson(state);
    if (!out) throw MaskError("cannot write mask state '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw MaskError("cannot write mask state '" + path.string() +
                    "': " + ec.message());
  }
}

std::optional<MaskState> LoadMaskState(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  return MaskStateFromJson(ReadFile(path));
}

std::string_view ToString(DeniedVia via) {
  switch (via) {
    case DeniedVia::kPhaseErrorOutput: return "phase_error_output";
    case DeniedVia::kTrace: return "trace";
    case DeniedVia::kPostHocAtime: return "post_hoc_atime";
  }
  return "?";
}

std::vector<DeniedAttempt> DetectDeniedAttempts(
    std::string_view phase, std::string_view stderr_text,
    const MaskState& mask, const std::vector<PathRule>& deny,
    const std::vector<FailedAccess>& failures) {
  std::vector<DeniedAttempt> out;
  std::set<std::string> seen;
  auto denied_path = [&](const std::string& rel) {
    return std::any_of(deny.begin(), deny.end(), [&](const PathRule& r) {
      return r.enabled && r.glob.Matches(rel);
    });
  };
  // Longest first so `tests/files/a` wins over `tests/files`.
  std::vector<const MaskEntry*> by_length;
  for (const MaskEntry& e : mask.entries) by_length.push_back(&e);
  std::stable_sort(by_length.begin(), by_length.end(),
                   [](const MaskEntry* a, const MaskEntry* b) {
                     return a->rel_path.size() > b->rel_path.size();
                   });

  std::size_t start = 0;
  while (start < stderr_text.size()) {
    std::size_t end = stderr_text.find('\n', start);
    if (end == std::string_view::npos) end = stderr_text.size();
    std::string_view line = stderr_text.substr(start, end - start);
    start = end + 1;
    if (line.find("Permission denied") == std::string_view::npos &&
        line.find("EACCES") == std::string_view::npos &&
        line.find("Operation not permitted") == std::string_view::npos &&
        line.find("EPERM") == std::string_view::npos) {
      continue;
    }
    for (const MaskEntry* e : by_length) {
      std::size_t pos = line.find(e->rel_path);
      if (pos == std::string_view::npos) continue;
      // Widen to the whole path token the message names.
      std::size_t tok_end = pos + e->rel_path.size();
      while (tok_end < line.size() && IsPathChar(line[tok_end])) ++tok_end;
      std::string token(line.substr(pos, tok_end - pos));
      std::optional<std::string> norm = NormalizeRelativePath(token);
      std::string rel = (norm && denied_path(*norm)) ? *norm : e->rel_path;
      if (seen.insert(rel).second) {
        out.push_back(DeniedAttempt{std::string(phase), rel,
                                    DeniedVia::kPhaseErrorOutput,
                                    std::string(line)});
      }
      break;
    }
  }

  for (const FailedAccess& f : failures) {
    if (f.external) continue;
    std::string rel;
    if (denied_path(f.path)) {
      rel = f.path;
    } else {
      for (const MaskEntry* e : by_length) {
        if (e->directory && f.path.rfind(e->rel_path + "/", 0) == 0) {
          rel = e->rel_path;
          break;
        }
      }
    }
    if (rel.empty() || !seen.insert(rel).second) continue;
    out.push_back(DeniedAttempt{std::string(phase), rel, DeniedVia::kTrace,
                                f.syscall + " failed: " + std::strerror(f.error)});
  }
  return out;
}

EnforcementResult EnforcePhase(PhaseRunner& runner, const PhaseSpec& phase) {
  const std::filesystem::path state_path = runner.work_dir() / kMaskStateFile;
  if (std::filesystem::exists(state_path)) {
    throw ProjectError("a previous mask was never restored ('" +
                       state_path.string() +
                       "'); run `phase-warden restore` first");
  }
  EnforcementResult result;
  result.mask = ApplyMask(runner.root(), phase.permissions.deny, phase.name,
                          runner.excludes());
  try {
    SaveMaskState(result.mask, state_path);
    result.observation = runner.RunPhase(phase);
  } catch (...) {
    try {
      RestoreMask(result.mask);
    } catch (const Error&) {
      // The original failure is the more useful one to surface.
    }
    std::error_code ec;
    std::filesystem::remove(state_path, ec);
    throw;
  }
  result.warnings = RestoreMask(result.mask);
  std::error_code ec;
  std::filesystem::remove(state_path, ec);
  result.denied = DetectDeniedAttempts(
      phase.name, ReadFile(result.observation.result.stderr_path), result.mask,
      phase.permissions.deny, result.observation.failed_accesses);
  return result;
}

}  // namespace phase_warden

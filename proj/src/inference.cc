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

#include "phase_warden/inference.h"

#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "phase_warden/error.h"

namespace phase_warden {
namespace {

// Targets that are conventionally not the build itself.
const std::set<std::string>& NonBuildTargets() {
  static const std::set<std::string> targets = {
      "install",   "uninstall",       "check",    "test",
      "clean",     "distclean",       "mostlyclean", "maintainer-clean",
      "dist",      "distcheck",       "installcheck"};
  return targets;
}

bool IsDir(const std::filesystem::path& p) {
  struct stat st {};
  return ::stat(p.c_str(), &st) == 0 && S_ISDIR(st.st_mode);
}

std::string DescribeRule(const PathRule& rule) {
  std::string modes;
  for (RuleMode m : rule.modes.ToVector()) {
    if (!modes.empty()) modes += ",";
    modes += ToString(m);
  }
  std::string s = "deny " + rule.pattern() + " {" + modes + "}";
  if (rule.severity == Severity::kWarn) s += " severity=warn";
  if (!rule.enabled) s += " disabled";
  return s;
}

PathRule MakeRule(const std::string& pattern, ModeSet modes, Severity severity,
                  const std::string& origin, bool enabled) {
  PathRule rule = PathRule::Make(pattern, modes);
  rule.severity = severity;
  rule.origin = origin;
  rule.enabled = enabled;
  return rule;
}

}  // namespace

std::vector<std::string> ScanMakeTargets(std::string_view makefile) {
  std::vector<std::string> targets;
  std::set<std::string> seen;
  std::istringstream in{std::string(makefile)};
  std::string line;
  bool continued = false;
  while (std::getline(in, line)) {
    const bool was_continued = continued;
    continued = !line.empty() && line.back() == '\\';
    if (was_continued || line.empty() || line[0] == '\t' || line[0] == ' ' ||
        line[0] == '#') {
      continue;
    }
    std::size_t colon = line.find(':');
    if (colon == std::string::npos) continue;
    // `X := y`, `X ::= y` and `X = a:b` are assignments, not rules.
    if (line.compare(colon, 2, ":=") == 0 || line.compare(colon, 3, "::=") == 0) {
      continue;
    }
    const std::string head = line.substr(0, colon);
    if (head.find('=') != std::string::npos) continue;
    std::istringstream words(head);
    std::string word;
    while (words >> word) {
      if (word[0] == '.' || word.find('%') != std::string::npos ||
          word.find('$') != std::string::npos) {
        continue;
      }
      if (seen.insert(word).second) targets.push_back(word);
    }
  }
  return targets;
}

std::vector<DetectedPhase> DetectPhases(const std::filesystem::path& root) {
  if (!IsDir(root) || ::access(root.c_str(), R_OK | X_OK) != 0) {
    throw ProjectError("cannot read project directory '" + root.string() + "'");
  }
  std::vector<DetectedPhase> phases;
  struct stat st {};
  const std::filesystem::path configure = root / "configure";
  if (::stat(configure.c_str(), &st) == 0 && S_ISREG(st.st_mode) &&
      (st.st_mode & 0111)) {
    phases.push_back({"D1", "configure", "./configure",
                      "executable configure script"});
  }
  std::string makefile_name;
  std::vector<std::string> targets;
  for (const char* name : {"GNUmakefile", "makefile", "Makefile"}) {
    std::ifstream in(root / name, std::ios::binary);
    if (!in) continue;
    makefile_name = name;
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    targets = ScanMakeTargets(text);
    break;
  }
  if (makefile_name.empty()) return phases;
  auto has = [&](const std::string& t) {
    return std::find(targets.begin(), targets.end(), t) != targets.end();
  };
  if (has("all")) {
    phases.push_back({"D2", "compile", "make", makefile_name + " target all"});
  } else if (!targets.empty() && !NonBuildTargets().contains(targets.front())) {
    phases.push_back({"D2", "compile", "make",
                      makefile_name + " default target " + targets.front()});
  }
  if (has("check")) {
    phases.push_back({"D3", "test", "make check", makefile_name + " target check"});
  } else if (has("test")) {
    phases.push_back({"D3", "test", "make test", makefile_name + " target test"});
  }
  if (has("install")) {
    phases.push_back({"D4", "install", "make install",
                      makefile_name + " target install"});
  }
  return phases;
}

const std::vector<HeuristicInfo>& Heuristics() {
  static const std::vector<HeuristicInfo> all = {
      {"H1", "deny the test directory to compile and install"},
      {"H2", "deny writes and deletes under src/ to test"},
      {"H3", "deny the test directory to configure (warning tier)"},
      {"H4", "exclude .git/ from monitoring"},
  };
  return all;
}

HeuristicSelection DefaultHeuristics() {
  return {{"H1", HeuristicState::kOn},
          {"H2", HeuristicState::kOn},
          {"H3", HeuristicState::kDisabled},
          {"H4", HeuristicState::kOn}};
}

HeuristicSelection ParseHeuristicList(std::string_view list) {
  HeuristicSelection sel;
  for (const HeuristicInfo& h : Heuristics()) sel[h.id] = HeuristicState::kOff;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t comma = list.find(',', start);
    if (comma == std::string_view::npos) comma = list.size();
    std::string id(list.substr(start, comma - start));
    start = comma + 1;
    id.erase(0, id.find_first_not_of(" \t"));
    id.erase(id.find_last_not_of(" \t") + 1);
    if (id.empty()) continue;
    std::transform(id.begin(), id.end(), id.begin(), ::toupper);
    if (!sel.contains(id)) {
      throw SpecError("--heuristics", "unknown heuristic '" + id + "'");
    }
    sel[id] = HeuristicState::kOn;
  }
  return sel;
}

InferenceOutcome InferSpec(const std::filesystem::path& root,
                           const HeuristicSelection& selection) {
  InferenceOutcome out;
  auto state = [&](const std::string& id) {
    auto it = selection.find(id);
    return it == selection.end() ? HeuristicState::kOff : it->second;
  };

  for (const DetectedPhase& d : DetectPhases(root)) {
    PhaseSpec phase;
    phase.name = d.name;
    phase.command = d.command;
    out.draft.phases.push_back(std::move(phase));
    out.rationale.push_back({d.id, d.evidence,
                             "phase " + d.name + ": " + d.command});
  }
  if (out.draft.phases.empty()) {
    out.warnings.push_back(
        "no configure script or makefile found; the draft has no phases");
  }
  auto find = [&](const char* name) -> PhaseSpec* {
    for (PhaseSpec& p : out.draft.phases) {
      if (p.name == name) return &p;
    }
    return nullptr;
  };
  auto emit = [&](const char* id, const char* phase_name, PathRule rule,
                  const std::string& evidence) {
    PhaseSpec* phase = find(phase_name);
    if (phase == nullptr) return;
    out.rationale.push_back(
        {id, evidence, "phase " + std::string(phase_name) + ": " + DescribeRule(rule)});
    phase->permissions.deny.push_back(std::move(rule));
  };

  std::vector<std::string> test_dirs;
  for (const char* d : {"tests", "test"}) {
    if (IsDir(root / d)) test_dirs.push_back(d);
  }
  if (state("H1") == HeuristicState::kOn) {
    for (const std::string& d : test_dirs) {
      for (const char* phase : {"compile", "install"}) {
        emit("H1", phase,
             MakeRule(d + "/", ModeSet::Any(), Severity::kError, "H1", true),
             d + "/");
      }
    }
  }
  if (state("H2") == HeuristicState::kOn && IsDir(root / "src")) {
    emit("H2", "test",
         MakeRule("src/", ModeSet::Of({RuleMode::kWrite, RuleMode::kDelete}),
                  Severity::kError, "H2", true),
         "src/");
  }
  if (state("H3") != HeuristicState::kOff) {
    for (const std::string& d : test_dirs) {
      emit("H3", "configure",
           MakeRule(d + "/", ModeSet::Any(), Severity::kWarn, "H3",
                    state("H3") == HeuristicState::kOn),
           d + "/");
    }
  }
  if (state("H4") == HeuristicState::kOn) {
    out.draft.global_excludes.push_back(".git/");
    out.rationale.push_back({"H4", IsDir(root / ".git") ? ".git/" : "(always)",
                             "global_excludes: .git/"});
  }
  return out;
}

std::string FormatRationale(const InferenceOutcome& outcome) {
  std::string text;
  for (const RationaleEntry& r : outcome.rationale) {
    text += r.id + "\t" + r.evidence + "\t" + r.entry + "\n";
  }
  return text;
}

}  // namespace phase_warden

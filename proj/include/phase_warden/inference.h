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

// Drafts a pipeline spec from project layout and standard build targets.
//
// Phase detection:
//   D1 configure  executable ./configure at the root       ./configure
//   D2 compile    makefile with an `all` or build default  make
//   D3 test       `check` target, else `test` target       make check / make test
//   D4 install    `install` target                         make install
// Heuristics:
//   H1 tests/ or test/ exists: deny it {any} to compile and install (error)
//   H2 src/ exists: deny src/ {write, delete} to test (error)
//   H3 deny the test directory to configure (warn; emitted disabled unless
//      selected)
//   H4 exclude .git/ from monitoring

#ifndef PHASE_WARDEN_INFERENCE_H_
#define PHASE_WARDEN_INFERENCE_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "phase_warden/spec.h"

namespace phase_warden {

struct DetectedPhase {
  std::string id;  // D1..D4
  std::string name;
  std::string command;
  std::string evidence;

  friend bool operator==(const DetectedPhase&, const DetectedPhase&) = default;
};

// Rule-header targets of a makefile, in order of appearance. Recipe lines,
// comments, variable assignments, special `.TARGETS` and pattern rules are
// skipped.
std::vector<std::string> ScanMakeTargets(std::string_view makefile);

// Throws ProjectError when `root` cannot be read.
std::vector<DetectedPhase> DetectPhases(const std::filesystem::path& root);

enum class HeuristicState { kOff, kDisabled, kOn };

struct HeuristicInfo {
  std::string id;
  std::string description;
};

const std::vector<HeuristicInfo>& Heuristics();

using HeuristicSelection = std::map<std::string, HeuristicState>;

// H1, H2, H4 on; H3 emitted disabled.
HeuristicSelection DefaultHeuristics();

// Comma-separated ids; listed heuristics on, the rest off. Throws SpecError
// for unknown ids.
HeuristicSelection ParseHeuristicList(std::string_view list);

struct RationaleEntry {
  std::string id;        // detection or heuristic id
  std::string evidence;  // the path or target that triggered it
  std::string entry;     // what was emitted

  friend bool operator==(const RationaleEntry&, const RationaleEntry&) = default;
};

struct InferenceOutcome {
  PipelineSpec draft;
  std::vector<RationaleEntry> rationale;
  std::vector<std::string> warnings;

  friend bool operator==(const InferenceOutcome&, const InferenceOutcome&) = default;
};

InferenceOutcome InferSpec(const std::filesystem::path& root,
                           const HeuristicSelection& selection = DefaultHeuristics());

// One line per rationale entry: `<id>\t<evidence>\t<entry>`.
std::string FormatRationale(const InferenceOutcome& outcome);

}  // namespace phase_warden

#endif  // PHASE_WARDEN_INFERENCE_H_

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

// Miniature fixture projects, benign analogues of build-pipeline poisoning,
// and a harness scoring the checker against their ground truth.
//
//   safe            configure writes build.sh; make builds out/app from src/
//   xz_like         safe, plus two "test" payload files under tests/files/;
//                   configure extracts a stage from them into build.sh, so
//                   compile reads both payloads and embeds the marker
//   env_exfil       the test script passes a preset token to a program
//   exec_injection  the compile recipe also runs base64 over a source file

#ifndef PHASE_WARDEN_BENCH_H_
#define PHASE_WARDEN_BENCH_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phase_warden/checker.h"
#include "phase_warden/runner.h"
#include "phase_warden/spec.h"

namespace phase_warden {

enum class FixtureKind { kSafe, kXzLike, kEnvExfil, kExecInjection };

std::string_view ToString(FixtureKind kind);
std::optional<FixtureKind> FixtureKindFromString(std::string_view s);
const std::vector<FixtureKind>& AllFixtureKinds();

inline constexpr char kPoisonMarker[] = "PHASE-WARDEN-POISON-MARKER-7f3a";
inline constexpr char kXzBadPayload[] = "tests/files/bad-3-corrupt_lzma2.xz";
inline constexpr char kXzGoodPayload[] = "tests/files/good-large_compressed.lzma";
inline constexpr char kEnvTokenVar[] = "PW_FIXTURE_TOKEN";
inline constexpr char kFixtureSpecFile[] = "phase-warden.json";
inline constexpr char kGroundTruthFile[] = "ground_truth.json";

struct ExpectedViolation {
  std::string phase;
  std::string subject;
  SubjectKind kind = SubjectKind::kFile;

  friend auto operator<=>(const ExpectedViolation&, const ExpectedViolation&) = default;
};

struct GroundTruth {
  std::string fixture_id;
  FixtureKind kind = FixtureKind::kSafe;
  std::vector<ExpectedViolation> expected_violations;
  std::string poison_marker;  // empty for fixtures that plant none
  EnvMap preset_env;          // environment the pipeline must run with
  std::map<std::string, std::uint64_t> files;  // generated file sizes

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

std::string GroundTruthToJson(const GroundTruth& truth);
GroundTruth GroundTruthFromJson(std::string_view json);
GroundTruth LoadGroundTruth(const std::filesystem::path& fixture_root);

// The hand-written spec for a fixture kind: configure, compile (`make`,
// denied tests/files/) and test (`make check`), plus the kind's env or exec
// policy.
PipelineSpec ReferenceSpec(FixtureKind kind);

// Writes the fixture, its reference spec and its manifest into `dest`,
// creating it if needed. Output depends only on (kind, seed). Throws
// ProjectError when `dest` exists and is not empty.
GroundTruth GenerateFixture(FixtureKind kind, const std::filesystem::path& dest,
                            std::uint64_t seed = 1);

struct EvalMetrics {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 1.0;
  double recall = 1.0;
  // Set when the ratio's denominator was zero and 1.0 is a convention.
  bool precision_by_convention = true;
  bool recall_by_convention = true;
};

// Fills precision and recall from the counts.
EvalMetrics FinishMetrics(std::size_t tp, std::size_t fp, std::size_t fn);

enum class SpecStrategy { kReference, kInferred };

std::string_view ToString(SpecStrategy strategy);
std::optional<SpecStrategy> SpecStrategyFromString(std::string_view s);

struct FixtureEvaluation {
  std::string fixture_id;
  FixtureKind kind = FixtureKind::kSafe;
  bool built = false;   // false: excluded from the metrics
  std::string error;
  std::vector<ExpectedViolation> reported;  // deduplicated
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double seconds = 0;
};

struct BenchResult {
  SpecStrategy strategy = SpecStrategy::kReference;
  EvalMetrics metrics;
  std::vector<FixtureEvaluation> fixtures;
  std::vector<std::string> warnings;
  double seconds = 0;
};

// Checks each fixture (on a scratch copy, so fixtures stay pristine) with
// the given spec strategy and scores the reports against the manifests.
// A reported (phase, subject, kind) is a true positive iff the manifest
// lists it.
BenchResult EvaluateChecker(const std::vector<std::filesystem::path>& fixtures,
                            SpecStrategy strategy,
                            Backend backend = Backend::kAuto);

// Subdirectories of `corpus` holding a ground-truth manifest, sorted.
std::vector<std::filesystem::path> ListCorpus(const std::filesystem::path& corpus);

std::string FormatMetricsTable(const BenchResult& result);
std::string BenchResultToJson(const BenchResult& result);

}  // namespace phase_warden

#endif  // PHASE_WARDEN_BENCH_H_

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

#include "phase_warden/bench.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <set>
#include <system_error>

#include "json.hpp"
#include "phase_warden/error.h"
#include "phase_warden/inference.h"

namespace phase_warden {
namespace {

using Json = nlohmann::ordered_json;

constexpr char kMakefile[] =
    ".PHONY: all check\n"
    "\n"
    "all:\n"
    "\tsh build.sh\n"
    "\n"
    "check:\n"
    "\tsh tests/run.sh\n";

constexpr char kExecInjectionMakefile[] =
    ".PHONY: all check\n"
    "\n"
    "all:\n"
    "\tsh build.sh\n"
    "\tbase64 src/main.c > out/.telemetry\n"
    "\n"
    "check:\n"
    "\tsh tests/run.sh\n";

constexpr char kConfigureHead[] =
    "#!/bin/sh\n"
    "# Writes build.sh, the script the compile step runs.\n"
    "set -e\n"
    "cat > build.sh <<'EOS'\n"
    "set -e\n"
    "mkdir -p out\n"
    "sed 's/@VERSION@/1.0/' src/main.c > out/app\n"
    "cat src/util.c >> out/app\n"
    "EOS\n";

// Pulls the hidden stage out of the "test data" and appends it to build.sh.
constexpr char kConfigureStage[] =
    "# test-suite integrity probe\n"
    "stage=$(cat tests/files/bad-3-corrupt_lzma2.xz "
    "tests/files/good-large_compressed.lzma | LC_ALL=C sed -n "
    "'s/^#pw-stage1#//p')\n"
    "if [ -n \"$stage\" ]; then\n"
    "  printf '%s\\n' \"$stage\" >> build.sh\n"
    "fi\n";

constexpr char kConfigureTail[] = "echo 'configured'\n";

constexpr char kStageLine[] =
    "cat tests/files/bad-3-corrupt_lzma2.xz "
    "tests/files/good-large_compressed.lzma | LC_ALL=C sed -n "
    "'s/^#pw-payload#//p' >> out/app";

constexpr char kTestScript[] =
    "#!/bin/sh\n"
    "set -e\n"
    "test -s out/app\n"
    "grep -q 'int main' out/app\n"
    "echo 'tests passed'\n";

constexpr char kExfilTestScript[] =
    "#!/bin/sh\n"
    "set -e\n"
    "test -s out/app\n"
    "grep -q 'int main' out/app\n"
    "env echo \"diag-token=$PW_FIXTURE_TOKEN\" > out/diagnostics.txt\n"
    "echo 'tests passed'\n";

std::string Hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// High-half bytes, never a newline: reads as opaque binary to line tools.
std::string Filler(std::mt19937_64& rng, std::size_t n) {
  std::string out(n, '\0');
  for (char& c : out) c = static_cast<char>(0x80 | (rng() & 0x7f));
  return out;
}

void WriteFixtureFile(const std::filesystem::path& root, const std::string& rel,
                      const std::string& content, mode_t mode,
                      GroundTruth& truth) {
  const std::filesystem::path path = root / rel;
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  if (!out || ::chmod(path.c_str(), mode) != 0) {
    throw ProjectError("cannot write fixture file '" + path.string() + "'");
  }
  truth.files[rel] = content.size();
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProjectError("cannot read '" + path.string() + "'");
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

std::string MakeTempDir(const char* prefix) {
  std::string templ =
      (std::filesystem::temp_directory_path() / (std::string(prefix) + "XXXXXX"))
          .string();
  if (::mkdtemp(templ.data()) == nullptr) {
    throw ProjectError(std::string("cannot create scratch directory: ") +
                       std::strerror(errno));
  }
  return templ;
}

}  // namespace

std::string_view ToString(FixtureKind kind) {
  switch (kind) {
    case FixtureKind::kSafe: return "safe";
    case FixtureKind::kXzLike: return "xz_like";
    case FixtureKind::kEnvExfil: return "env_exfil";
    case FixtureKind::kExecInjection: return "exec_injection";
  }
  return "?";
}

std::optional<FixtureKind> FixtureKindFromString(std::string_view s) {
  for (FixtureKind k : AllFixtureKinds()) {
    if (ToString(k) == s) return k;
  }
  return std::nullopt;
}

const std::vector<FixtureKind>& AllFixtureKinds() {
  static const std::vector<FixtureKind> kinds = {
      FixtureKind::kSafe, FixtureKind::kXzLike, FixtureKind::kEnvExfil,
      FixtureKind::kExecInjection};
  return kinds;
}

std::string GroundTruthToJson(const GroundTruth& truth) {
  Json j;
  j["fixture_id"] = truth.fixture_id;
  j["kind"] = ToString(truth.kind);
  Json expected = Json::array();
  for (const ExpectedViolation& e : truth.expected_violations) {
    expected.push_back(
        {{"phase", e.phase}, {"subject", e.subject}, {"kind", ToString(e.kind)}});
  }
  j["expected_violations"] = std::move(expected);
  j["poison_marker"] = truth.poison_marker;
  j["preset_env"] = truth.preset_env;
  j["files"] = truth.files;
  return j.dump(2) + "\n";
}

GroundTruth GroundTruthFromJson(std::string_view text) {
  try {
    Json j = Json::parse(text);
    GroundTruth truth;
    truth.fixture_id = j.at("fixture_id").get<std::string>();
    std::optional<FixtureKind> kind =
        FixtureKindFromString(j.at("kind").get<std::string>());
    if (!kind) throw Error("unknown fixture kind in ground truth");
    truth.kind = *kind;
    for (const Json& e : j.at("expected_violations")) {
      std::optional<SubjectKind> sk =
          SubjectKindFromString(e.at("kind").get<std::string>());
      if (!sk) throw Error("unknown subject kind in ground truth");
      truth.expected_violations.push_back(
          {e.at("phase").get<std::string>(), e.at("subject").get<std::string>(),
           *sk});
    }
    truth.poison_marker = j.value("poison_marker", "");
    truth.preset_env = j.value("preset_env", EnvMap{});
    truth.files = j.value("files", std::map<std::string, std::uint64_t>{});
    return truth;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed ground truth: ") + e.what());
  }
}

GroundTruth LoadGroundTruth(const std::filesystem::path& fixture_root) {
  return GroundTruthFromJson(ReadFile(fixture_root / kGroundTruthFile));
}

PipelineSpec ReferenceSpec(FixtureKind kind) {
  PipelineSpec spec;
  spec.global_excludes = {".git/"};
  PhaseSpec configure;
  configure.name = "configure";
  configure.command = "./configure";
  PhaseSpec compile;
  compile.name = "compile";
  compile.command = "make";
  compile.permissions.deny.push_back(PathRule::Make("tests/files/"));
  PhaseSpec test;
  test.name = "test";
  test.command = "make check";
  if (kind == FixtureKind::kEnvExfil) {
    test.env_policy.deny_read = {"PW_FIXTURE_*"};
  }
  if (kind == FixtureKind::kExecInjection) {
    compile.exec_policy.denied_programs = {"curl", "wget", "nc", "ncat",
                                           "base64"};
  }
  spec.phases = {configure, compile, test};
  return spec;
}

GroundTruth GenerateFixture(FixtureKind kind, const std::filesystem::path& dest,
                            std::uint64_t seed) {
  std::error_code ec;
  if (std::filesystem::exists(dest, ec)) {
    if (!std::filesystem::is_directory(dest, ec)) {
      throw ProjectError("fixture destination '" + dest.string() +
                         "' is not a directory");
    }
    if (!std::filesystem::is_empty(dest, ec)) {
      throw ProjectError("fixture destination '" + dest.string() +
                         "' is not empty");
    }
  }
  std::filesystem::create_directories(dest, ec);
  if (ec) {
    throw ProjectError("cannot create '" + dest.string() + "': " + ec.message());
  }

  std::mt19937_64 rng(seed);
  GroundTruth truth;
  truth.kind = kind;
  truth.fixture_id = std::string(ToString(kind)) + "-" + std::to_string(seed);
  const std::string build_id = Hex(rng());

  std::string configure = kConfigureHead;
  if (kind == FixtureKind::kXzLike) configure += kConfigureStage;
  configure += kConfigureTail;
  WriteFixtureFile(dest, "configure", configure, 0755, truth);
  WriteFixtureFile(dest, "Makefile",
                   kind == FixtureKind::kExecInjection ? kExecInjectionMakefile
                                                       : kMakefile,
                   0644, truth);
  WriteFixtureFile(dest, "src/main.c",
                   "/* app @VERSION@, build " + build_id + " */\n"
                   "#include <stdio.h>\n"
                   "\n"
                   "const char *greeting(void);\n"
                   "\n"
                   "int main(void) {\n"
                   "  puts(greeting());\n"
                   "  return 0;\n"
                   "}\n",
                   0644, truth);
  WriteFixtureFile(dest, "src/util.c",
                   "const char *greeting(void) { return \"hello\"; }\n", 0644,
                   truth);
  WriteFixtureFile(dest, "tests/run.sh",
                   kind == FixtureKind::kEnvExfil ? kExfilTestScript : kTestScript,
                   0755, truth);
  WriteFixtureFile(dest, "README",
                   "Fixture project (" + std::string(ToString(kind)) +
                       ").\n\n  ./configure && make && make check\n",
                   0644, truth);

  switch (kind) {
    case FixtureKind::kSafe:
      break;
    case FixtureKind::kXzLike: {
      truth.poison_marker = kPoisonMarker;
      std::string bad = Filler(rng, 384) + "\n#pw-stage1#" + kStageLine + "\n" +
                        Filler(rng, 256);
      std::string good = Filler(rng, 1024) + "\n#pw-payload#" + kPoisonMarker +
                         "\n" + Filler(rng, 512);
      WriteFixtureFile(dest, kXzBadPayload, bad, 0644, truth);
      WriteFixtureFile(dest, kXzGoodPayload, good, 0644, truth);
      truth.expected_violations = {{"compile", kXzBadPayload, SubjectKind::kFile},
                                   {"compile", kXzGoodPayload, SubjectKind::kFile}};
      break;
    }
    case FixtureKind::kEnvExfil:
      truth.preset_env[kEnvTokenVar] = "pwtok-" + Hex(rng());
      truth.expected_violations = {{"test", kEnvTokenVar, SubjectKind::kEnv}};
      break;
    case FixtureKind::kExecInjection:
      truth.expected_violations = {{"compile", "base64", SubjectKind::kExec}};
      break;
  }
  std::sort(truth.expected_violations.begin(), truth.expected_violations.end());

  const std::string spec_text = SerializeSpec(ReferenceSpec(kind));
  WriteFixtureFile(dest, kFixtureSpecFile, spec_text, 0644, truth);
  {
    std::ofstream out(dest / kGroundTruthFile, std::ios::binary | std::ios::trunc);
    out << GroundTruthToJson(truth);
    if (!out) throw ProjectError("cannot write ground truth manifest");
  }
  return truth;
}

EvalMetrics FinishMetrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  EvalMetrics m;
  m.true_positives = tp;
  m.false_positives = fp;
  m.false_negatives = fn;
  m.precision_by_convention = tp + fp == 0;
  m.recall_by_convention = tp + fn == 0;
  m.precision = m.precision_by_convention ? 1.0 : double(tp) / double(tp + fp);
  m.recall = m.recall_by_convention ? 1.0 : double(tp) / double(tp + fn);
  return m;
}

std::string_view ToString(SpecStrategy strategy) {
  return strategy == SpecStrategy::kReference ? "reference" : "inferred";
}

std::optional<SpecStrategy> SpecStrategyFromString(std::string_view s) {
  if (s == "reference") return SpecStrategy::kReference;
  if (s == "inferred") return SpecStrategy::kInferred;
  return std::nullopt;
}

std::vector<std::filesystem::path> ListCorpus(const std::filesystem::path& corpus) {
  std::vector<std::filesystem::path> out;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(corpus, ec)) {
    if (entry.is_directory() &&
        std::filesystem::exists(entry.path() / kGroundTruthFile)) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

FixtureEvaluation EvaluateOne(const std::filesystem::path& fixture,
                              SpecStrategy strategy, Backend backend) {
  FixtureEvaluation eval;
  const auto t0 = std::chrono::steady_clock::now();
  GroundTruth truth = LoadGroundTruth(fixture);
  eval.fixture_id = truth.fixture_id;
  eval.kind = truth.kind;

  const std::filesystem::path scratch = MakeTempDir("phase-warden-bench-");
  struct Cleanup {
    std::filesystem::path dir;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove_all(dir, ec);
    }
  } cleanup{scratch};
  const std::filesystem::path project = scratch / "project";
  std::filesystem::copy(fixture, project,
                        std::filesystem::copy_options::recursive);

  try {
    PipelineSpec spec;
    if (strategy == SpecStrategy::kReference) {
      spec = std::filesystem::exists(project / kFixtureSpecFile)
                 ? LoadSpecFile(project / kFixtureSpecFile)
                 : ReferenceSpec(truth.kind);
    } else {
      spec = InferSpec(project).draft;
      if (spec.phases.empty()) throw ProjectError("inference found no phases");
    }
    RunOptions options;
    options.backend = backend;
    options.extra_env = truth.preset_env;
    RunReport run = RunPipeline(spec, project, options);
    if (run.aborted_at) {
      const auto& last = run.observations.back().result;
      throw RunError("phase '" + last.phase_name + "' failed with exit code " +
                     std::to_string(last.exit_code));
    }
    ViolationReport report = CheckRun(spec, run);
    std::set<ExpectedViolation> reported;
    for (const Violation& v : report.violations) {
      reported.insert({v.phase_name, v.subject, v.subject_kind});
    }
    const std::set<ExpectedViolation> expected(truth.expected_violations.begin(),
                                               truth.expected_violations.end());
    for (const ExpectedViolation& r : reported) {
      (expected.contains(r) ? eval.true_positives : eval.false_positives)++;
    }
    for (const ExpectedViolation& e : expected) {
      if (!reported.contains(e)) ++eval.false_negatives;
    }
    eval.reported.assign(reported.begin(), reported.end());
    eval.built = true;
  } catch (const Error& e) {
    eval.error = e.what();
  }
  eval.seconds = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0).count();
  return eval;
}

}  // namespace

BenchResult EvaluateChecker(const std::vector<std::filesystem::path>& fixtures,
                            SpecStrategy strategy, Backend backend) {
  BenchResult result;
  result.strategy = strategy;
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const std::filesystem::path& f : fixtures) {
    FixtureEvaluation eval = EvaluateOne(f, strategy, backend);
    if (eval.built) {
      tp += eval.true_positives;
      fp += eval.false_positives;
      fn += eval.false_negatives;
    } else {
      result.warnings.push_back("fixture " + eval.fixture_id +
                                " excluded from metrics: " + eval.error);
    }
    result.fixtures.push_back(std::move(eval));
  }
  result.metrics = FinishMetrics(tp, fp, fn);
  result.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0).count();
  return result;
}

std::string FormatMetricsTable(const BenchResult& result) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-22s %-16s %-6s %4s %4s %4s %8s\n",
                "fixture", "kind", "built", "TP", "FP", "FN", "seconds");
  out += line;
  for (const FixtureEvaluation& f : result.fixtures) {
    std::snprintf(line, sizeof(line), "%-22s %-16s %-6s %4zu %4zu %4zu %8.2f\n",
                  f.fixture_id.c_str(), std::string(ToString(f.kind)).c_str(),
                  f.built ? "yes" : "no", f.true_positives, f.false_positives,
                  f.false_negatives, f.seconds);
    out += line;
  }
  const EvalMetrics& m = result.metrics;
  std::snprintf(line, sizeof(line), "%-22s %-16s %-6s %4zu %4zu %4zu %8.2f\n",
                "total", std::string(ToString(result.strategy)).c_str(), "",
                m.true_positives, m.false_positives, m.false_negatives,
                result.seconds);
  out += line;
  std::snprintf(line, sizeof(line), "precision %.3f%s  recall %.3f%s\n",
                m.precision, m.precision_by_convention ? " (no reports)" : "",
                m.recall, m.recall_by_convention ? " (nothing expected)" : "");
  out += line;
  return out;
}

std::string BenchResultToJson(const BenchResult& result) {
  Json j;
  j["strategy"] = ToString(result.strategy);
  const EvalMetrics& m = result.metrics;
  j["true_positives"] = m.true_positives;
  j["false_positives"] = m.false_positives;
  j["false_negatives"] = m.false_negatives;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["precision_by_convention"] = m.precision_by_convention;
  j["recall_by_convention"] = m.recall_by_convention;
  Json fixtures = Json::array();
  for (const FixtureEvaluation& f : result.fixtures) {
    Json reported = Json::array();
    for (const ExpectedViolation& r : f.reported) {
      reported.push_back(
          {{"phase", r.phase}, {"subject", r.subject}, {"kind", ToString(r.kind)}});
    }
    fixtures.push_back({{"fixture_id", f.fixture_id},
                        {"kind", ToString(f.kind)},
                        {"built", f.built},
                        {"error", f.error},
                        {"true_positives", f.true_positives},
                        {"false_positives", f.false_positives},
                        {"false_negatives", f.false_negatives},
                        {"seconds", f.seconds},
                        {"reported", std::move(reported)}});
  }
  j["fixtures"] = std::move(fixtures);
  j["warnings"] = result.warnings;
  j["seconds"] = result.seconds;
  return j.dump(2) + "\n";
}

}  // namespace phase_warden

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

#include <gtest/gtest.h>

#include "phase_warden/checker.h"
#include "phase_warden/error.h"
#include "phase_warden/report.h"
#include "phase_warden/spec.h"

namespace phase_warden {
namespace {

AccessRecord Access(std::string path, AccessMode mode,
                    Evidence ev = Evidence::kTrace) {
  AccessRecord r;
  r.phase_name = "compile";
  r.path = std::move(path);
  r.mode = mode;
  r.evidence = ev;
  return r;
}

PhaseObservation Obs(std::string phase, std::vector<AccessRecord> accesses) {
  PhaseObservation obs;
  obs.result.phase_name = std::move(phase);
  obs.file_accesses = std::move(accesses);
  obs.env_delta = EnvDelta{};
  obs.exec_records = std::vector<ExecRecord>{};
  return obs;
}

PhaseSpec CompileDenyingTestFiles() {
  PhaseSpec p;
  p.name = "compile";
  p.command = "make";
  p.permissions.deny.push_back(PathRule::Make("tests/files/"));
  return p;
}

TEST(MatchPathRule, Examples) {
  PathRule tests = PathRule::Make("tests/files/");
  EXPECT_TRUE(MatchPathRule(tests, "tests/files/bad-3-corrupt_lzma2.xz",
                            AccessMode::kRead));
  EXPECT_FALSE(MatchPathRule(tests, "src/main.c", AccessMode::kRead));
  PathRule src_write = PathRule::Make("src/**", ModeSet::Of({RuleMode::kWrite}));
  EXPECT_FALSE(MatchPathRule(src_write, "src/main.c", AccessMode::kRead));
  EXPECT_TRUE(MatchPathRule(src_write, "src/main.c", AccessMode::kWrite));
  PathRule off = tests;
  off.enabled = false;
  EXPECT_FALSE(MatchPathRule(off, "tests/files/a", AccessMode::kRead));
}

TEST(CheckPhase, TwoPayloadReadsAreTwoViolations) {
  PhaseObservation obs = Obs("compile", {
      Access("src/main.c", AccessMode::kRead),
      Access("tests/files/bad-3-corrupt_lzma2.xz", AccessMode::kRead),
      Access("tests/files/good-large_compressed.lzma", AccessMode::kRead),
      Access("out/app", AccessMode::kCreate),
  });
  auto v = CheckPhase(CompileDenyingTestFiles(), obs);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].subject, "tests/files/bad-3-corrupt_lzma2.xz");
  EXPECT_EQ(v[1].subject, "tests/files/good-large_compressed.lzma");
  for (const Violation& x : v) {
    EXPECT_EQ(x.phase_name, "compile");
    EXPECT_EQ(x.severity, Severity::kError);
    EXPECT_EQ(x.rule.pattern, "tests/files/");
    EXPECT_TRUE(RuleStillMatches(x));
  }
}

TEST(CheckPhase, EmptyPermissionsAllowEverything) {
  PhaseSpec p;
  p.name = "compile";
  p.command = "make";
  PhaseObservation obs = Obs("compile", {Access("tests/files/x", AccessMode::kRead),
                                         Access("a", AccessMode::kDelete)});
  obs.env_delta->added["LD_PRELOAD"] = "x";
  obs.exec_records->push_back({"curl", {"curl"}, "/", 0});
  EXPECT_TRUE(CheckPhase(p, obs).empty());
}

TEST(CheckPhase, ExternalPathsAreIgnored) {
  AccessRecord ext = Access("/etc/passwd", AccessMode::kRead);
  ext.external = true;
  PhaseSpec p = CompileDenyingTestFiles();
  p.permissions.deny.push_back(PathRule::Make("**"));
  EXPECT_TRUE(CheckPhase(p, Obs("compile", {ext})).empty());
}

TEST(CheckPhase, DeniedEnvModification) {
  PhaseSpec p;
  p.name = "test";
  p.command = "make check";
  p.env_policy.deny_modify = {"LD_*"};
  PhaseObservation obs = Obs("test", {});
  obs.env_delta->changed["LD_PRELOAD"] = {"", "/tmp/evil.so"};
  obs.env_delta->changed["HOME"] = {"/a", "/b"};
  auto v = CheckPhase(p, obs);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].subject_kind, SubjectKind::kEnv);
  EXPECT_EQ(v[0].subject, "LD_PRELOAD");
  EXPECT_EQ(v[0].mode, AccessMode::kWrite);
  EXPECT_EQ(v[0].rule.policy, kPolicyEnvDenyModify);
  EXPECT_TRUE(RuleStillMatches(v[0]));
}

TEST(CheckPhase, DeniedEnvReadAndPrograms) {
  PhaseSpec p;
  p.name = "test";
  p.command = "make check";
  p.env_policy.deny_read = {"PW_*"};
  p.exec_policy.denied_programs = {"curl", "nc"};
  p.exec_policy.allowed_programs = std::vector<std::string>{"make", "sh", "curl"};
  PhaseObservation obs = Obs("test", {});
  obs.env_reads = {{"PW_TOKEN", "curl"}, {"PW_TOKEN", "echo"}};
  obs.exec_records = std::vector<ExecRecord>{
      {"make", {"make"}, "/", 0}, {"curl", {"curl"}, "/", 1},
      {"curl", {"curl"}, "/", 2}, {"wget", {"wget"}, "/", 3}};
  auto v = CheckPhase(p, obs);
  std::vector<std::pair<std::string, std::string>> got;
  for (const Violation& x : v) {
    got.emplace_back(x.subject, x.rule.policy);
    EXPECT_TRUE(RuleStillMatches(x)) << x.subject;
  }
  EXPECT_EQ(got, (std::vector<std::pair<std::string, std::string>>{
                     {"PW_TOKEN", kPolicyEnvDenyRead},
                     {"curl", kPolicyExecDenied},
                     {"wget", kPolicyExecAllowed}}));
}

TEST(CheckPhase, DenyBeatsAllow) {
  PhaseSpec p = CompileDenyingTestFiles();
  p.permissions.allow.push_back(PathRule::Make("tests/files/"));
  auto v = CheckPhase(p, Obs("compile", {Access("tests/files/a", AccessMode::kRead)}));
  EXPECT_EQ(v.size(), 1u);
}

TEST(CheckPhase, AllowListGapIsOnlyANote) {
  PhaseSpec p;
  p.name = "compile";
  p.command = "make";
  p.permissions.allow.push_back(PathRule::Make("src/"));
  std::vector<std::string> notes;
  auto v = CheckPhase(p, Obs("compile", {Access("docs/x", AccessMode::kRead)}), &notes);
  EXPECT_TRUE(v.empty());
  EXPECT_EQ(notes.size(), 1u);
}

TEST(CheckPhase, WarnSeverityCarriesThrough) {
  PhaseSpec p;
  p.name = "configure";
  p.command = "./configure";
  PathRule r = PathRule::Make("tests/");
  r.severity = Severity::kWarn;
  r.origin = "H3";
  p.permissions.deny.push_back(r);
  auto v = CheckPhase(p, Obs("configure", {Access("tests/a", AccessMode::kRead)}));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].severity, Severity::kWarn);
  EXPECT_EQ(v[0].rule.origin, "H3");
}

TEST(CheckRun, DigestMismatchIsStale) {
  PipelineSpec spec;
  spec.phases.push_back(CompileDenyingTestFiles());
  RunReport run;
  run.spec_digest = "0000";
  EXPECT_THROW(CheckRun(spec, run), StaleReportError);
  run.spec_digest = SpecDigest(spec);
  run.observations.push_back(Obs("compile", {Access("tests/files/a", AccessMode::kRead)}));
  ViolationReport report = CheckRun(spec, run);
  EXPECT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.CountsFor("compile").file, 1u);
  EXPECT_EQ(CheckRun(spec, run).violations, report.violations);
}

TEST(Report, TextLineFormat) {
  Violation v;
  v.phase_name = "compile";
  v.subject = "tests/files/bad-3-corrupt_lzma2.xz";
  v.mode = AccessMode::kRead;
  v.rule.pattern = "tests/files/";
  EXPECT_EQ(FormatViolation(v),
            "compile: denied read access to tests/files/bad-3-corrupt_lzma2.xz "
            "(rule: tests/files/)");
  EXPECT_EQ(FormatViolation(v, true),
            "compile: denied read access to bad-3-corrupt_lzma2.xz "
            "(rule: tests/files/)");
}

TEST(Report, JsonRoundTrip) {
  PipelineSpec spec;
  PhaseSpec p = CompileDenyingTestFiles();
  p.env_policy.deny_modify = {"LD_*"};
  spec.phases.push_back(p);
  RunReport run;
  run.spec_digest = SpecDigest(spec);
  PhaseObservation obs = Obs("compile", {Access("tests/files/a", AccessMode::kRead,
                                                Evidence::kAtimeDiff)});
  obs.env_delta->added["LD_PRELOAD"] = "x";
  obs.result.exit_code = 3;
  obs.result.warnings = {"something odd"};
  obs.result.duration = std::chrono::nanoseconds(123456789);
  obs.result.started_at = ParseTimestamp("2026-01-02T03:04:05.123456789Z");
  run.observations.push_back(obs);
  run.aborted_at = "compile";
  ViolationReport report = CheckRun(spec, run);
  report.notes.push_back("a note");
  ASSERT_EQ(report.violations.size(), 2u);
  ViolationReport back = ReportFromJson(ReportToJson(report));
  EXPECT_EQ(back, report);
}

TEST(Report, TimestampsKeepNanoseconds) {
  auto t = ParseTimestamp("2026-10-16T07:47:44.135854855Z");
  EXPECT_EQ(FormatTimestamp(t), "2026-10-16T07:47:44.135854855Z");
}

}  // namespace
}  // namespace phase_warden

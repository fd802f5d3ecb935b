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
#include <sys/stat.h>

#include <set>

#include "phase_warden/bench.h"
#include "phase_warden/enforcer.h"
#include "phase_warden/error.h"
#include "phase_warden/runner.h"
#include "phase_warden/workspace.h"
#include "test_util.h"

namespace phase_warden {
namespace {

using testing::TempDir;
using testing::WriteFile;

std::map<std::string, mode_t> SurveyBits(const std::filesystem::path& root) {
  std::map<std::string, mode_t> out;
  for (auto it = std::filesystem::recursive_directory_iterator(root);
       it != std::filesystem::recursive_directory_iterator(); ++it) {
    struct stat st {};
    ::lstat(it->path().c_str(), &st);
    out[std::filesystem::relative(it->path(), root).string()] = st.st_mode & 07777;
  }
  return out;
}

class EnforcerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    if (CheckPrivilege().privileged) {
      GTEST_SKIP() << "masking needs an unprivileged user: "
                   << CheckPrivilege().reason;
    }
  }
  TempDir dir_;
};

TEST_F(EnforcerTest, MasksPayloadDirectoryAndFiles) {
  GenerateFixture(FixtureKind::kXzLike, dir_ / "fx");
  std::vector<PathRule> deny = {PathRule::Make("tests/files/")};
  std::vector<MaskEntry> plan = PlanMask(dir_ / "fx", deny);
  std::set<std::string> paths;
  for (const MaskEntry& e : plan) paths.insert(e.rel_path);
  EXPECT_EQ(paths, (std::set<std::string>{"tests/files", kXzBadPayload,
                                          kXzGoodPayload}));
  // Deepest first, so the directory is masked last.
  EXPECT_EQ(plan.back().rel_path, "tests/files");
}

TEST_F(EnforcerTest, EmptyDenyLeavesBitsAlone) {
  WriteFile(dir_ / "a/b.txt", "x");
  auto before = SurveyBits(dir_.path());
  MaskState s = ApplyMask(dir_.path(), {}, "p");
  EXPECT_TRUE(s.entries.empty());
  EXPECT_EQ(SurveyBits(dir_.path()), before);
  RestoreMask(s);
}

TEST_F(EnforcerTest, ApplyThenRestoreIsIdentity) {
  WriteFile(dir_ / "tests/files/a.bin", "x");
  WriteFile(dir_ / "tests/files/sub/b.bin", "y");
  WriteFile(dir_ / "src/main.c", "z");
  std::filesystem::permissions(dir_ / "tests/files/a.bin",
                               std::filesystem::perms(0640));
  auto before = SurveyBits(dir_.path());
  MaskState s = ApplyMask(dir_.path(), {PathRule::Make("tests/")}, "p");
  EXPECT_EQ(s.entries.size(), 5u);
  for (const MaskEntry& e : s.entries) {
    struct stat st {};
    ::lstat(e.abs_path.c_str(), &st);
    EXPECT_EQ(st.st_mode & 07777, e.masked) << e.rel_path;
    EXPECT_EQ(e.masked, 0u) << e.rel_path;
  }
  EXPECT_TRUE(RestoreMask(s).empty());
  EXPECT_EQ(SurveyBits(dir_.path()), before);
  EXPECT_THROW(RestoreMask(s), MaskError);
}

TEST_F(EnforcerTest, WriteOnlyRuleKeepsReadBits) {
  WriteFile(dir_ / "src/main.c", "x");
  MaskState s = ApplyMask(
      dir_.path(), {PathRule::Make("src/", ModeSet::Of({RuleMode::kWrite}))}, "p");
  struct stat st {};
  ::stat((dir_ / "src/main.c").c_str(), &st);
  EXPECT_EQ(st.st_mode & 0222, 0u);
  EXPECT_NE(st.st_mode & 0444, 0u);
  RestoreMask(s);
}

TEST_F(EnforcerTest, VanishedEntryWarnsOthersRestored) {
  WriteFile(dir_ / "d/a.txt", "1");
  WriteFile(dir_ / "d/b.txt", "2");
  auto before = SurveyBits(dir_.path());
  // Write-only masking leaves the directory searchable for the deletion.
  MaskState s = ApplyMask(
      dir_.path(), {PathRule::Make("d/a.txt", ModeSet::Of({RuleMode::kWrite})),
                    PathRule::Make("d/b.txt")},
      "p");
  std::filesystem::remove(dir_ / "d/a.txt");
  auto warnings = RestoreMask(s);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("d/a.txt"), std::string::npos);
  before.erase("d/a.txt");
  EXPECT_EQ(SurveyBits(dir_.path()), before);
}

TEST_F(EnforcerTest, StateFileRoundTrips) {
  WriteFile(dir_ / "x/y", "1");
  MaskState s = ApplyMask(dir_.path(), {PathRule::Make("x/")}, "compile");
  SaveMaskState(s, dir_ / "state");
  std::optional<MaskState> loaded = LoadMaskState(dir_ / "state");
  ASSERT_TRUE(loaded);
  EXPECT_EQ(*loaded, s);
  RestoreMask(*loaded);
  EXPECT_FALSE(LoadMaskState(dir_ / "missing"));
}

TEST_F(EnforcerTest, DeniedCatFails) {
  WriteFile(dir_ / "tests/files/payload.bin", "secret");
  PhaseSpec phase;
  phase.name = "leak";
  phase.command = "cat tests/files/payload.bin";
  phase.permissions.deny = {PathRule::Make("tests/files/")};
  for (Backend b : {Backend::kSnapshot, Backend::kAuto}) {
    RunOptions o;
    o.backend = b;
    PhaseRunner runner(dir_.path(), o, {});
    auto before = SurveyBits(dir_.path() / "tests");
    EnforcementResult r = EnforcePhase(runner, phase);
    EXPECT_NE(r.observation.result.exit_code, 0);
    ASSERT_FALSE(r.denied.empty());
    for (const DeniedAttempt& d : r.denied) {
      EXPECT_TRUE(MatchPathRule(phase.permissions.deny[0], d.rel_path,
                                AccessMode::kRead)) << d.rel_path;
    }
    bool payload = false;
    for (const DeniedAttempt& d : r.denied) {
      payload |= d.rel_path == "tests/files/payload.bin";
    }
    EXPECT_TRUE(payload);
    EXPECT_EQ(SurveyBits(dir_.path() / "tests"), before);
    EXPECT_FALSE(std::filesystem::exists(runner.work_dir() / kMaskStateFile));
    for (const AccessRecord& a : r.observation.file_accesses) {
      EXPECT_NE(a.path, "tests/files/payload.bin");
    }
  }
}

TEST_F(EnforcerTest, EmptyDenyMatchesPlainRun) {
  WriteFile(dir_ / "in.txt", "data");
  PhaseSpec phase;
  phase.name = "copy";
  phase.command = "cp in.txt out.txt && rm out.txt && echo done > log.txt";
  RunOptions o;
  o.backend = Backend::kSnapshot;
  PhaseRunner runner(dir_.path(), o, {});
  PhaseObservation plain = runner.RunPhase(phase);
  std::filesystem::remove(dir_ / "log.txt");
  EnforcementResult enforced = EnforcePhase(runner, phase);
  EXPECT_EQ(enforced.observation.result.exit_code, plain.result.exit_code);
  auto key = [](const std::vector<AccessRecord>& v) {
    std::set<std::pair<std::string, AccessMode>> out;
    for (const AccessRecord& a : v) out.emplace(a.path, a.mode);
    return out;
  };
  EXPECT_EQ(key(enforced.observation.file_accesses), key(plain.file_accesses));
  EXPECT_TRUE(enforced.denied.empty());
}

TEST_F(EnforcerTest, LeftoverStateBlocksEnforcement) {
  PhaseSpec phase;
  phase.name = "p";
  phase.command = "true";
  PhaseRunner runner(dir_.path(), RunOptions{}, {});
  WriteFile(runner.work_dir() / kMaskStateFile, "{}");
  EXPECT_THROW(EnforcePhase(runner, phase), Error);
}

TEST(DetectDeniedAttempts, ParsesShellErrors) {
  MaskState mask;
  mask.entries.push_back({"/p/tests/files/a b.xz", "tests/files/a b.xz", 0644, 0, false});
  mask.entries.push_back({"/p/tests/files", "tests/files", 0755, 0, true});
  std::vector<PathRule> deny = {PathRule::Make("tests/files/")};
  auto got = DetectDeniedAttempts(
      "compile",
      "cat: 'tests/files/a b.xz': Permission denied\n"
      "sed: can't read tests/files/a b.xz: Permission denied\n"
      "unrelated: Permission denied\n",
      mask, deny, {});
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].rel_path, "tests/files/a b.xz");
  EXPECT_EQ(got[0].observed_via, DeniedVia::kPhaseErrorOutput);
}

}  // namespace
}  // namespace phase_warden

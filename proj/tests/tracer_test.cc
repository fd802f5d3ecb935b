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

#include <set>

#include "phase_warden/shell.h"
#include "phase_warden/tracer.h"
#include "test_util.h"

namespace phase_warden {
namespace {

using testing::TempDir;
using testing::WriteFile;

class TracerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!ProbeTracing().available) GTEST_SKIP() << ProbeTracing().reason;
  }

  TraceResult Trace(const std::string& script,
                    const std::vector<std::string>& excludes = {}) {
    ShellCommand cmd{BuildPhaseScript(script, {}), dir_.path(),
                     CurrentEnvironment(), "/dev/null", "/dev/null"};
    return TraceRun(cmd, dir_.path(), "p", excludes);
  }

  std::set<std::pair<std::string, AccessMode>> Internal(const TraceResult& r) {
    std::set<std::pair<std::string, AccessMode>> out;
    for (const AccessRecord& a : r.accesses) {
      EXPECT_EQ(a.evidence, Evidence::kTrace);
      if (!a.external) out.emplace(a.path, a.mode);
    }
    return out;
  }

  TempDir dir_;
};

TEST_F(TracerTest, CatIsARead) {
  WriteFile(dir_ / "f.txt", "data");
  TraceResult r = Trace("cat f.txt > /dev/null");
  EXPECT_EQ(r.exit.code, 0);
  EXPECT_EQ(Internal(r), (std::set<std::pair<std::string, AccessMode>>{
                             {"f.txt", AccessMode::kRead}}));
}

TEST_F(TracerTest, NoOpTouchesOnlyExternalFiles) {
  TraceResult r = Trace("true");
  EXPECT_TRUE(Internal(r).empty());
  bool any_external = false;
  for (const AccessRecord& a : r.accesses) any_external |= a.external;
  EXPECT_TRUE(any_external);
}

TEST_F(TracerTest, WriteCreateDeleteRename) {
  WriteFile(dir_ / "w.txt", "a");
  WriteFile(dir_ / "d.txt", "b");
  WriteFile(dir_ / "m.txt", "c");
  TraceResult r = Trace("echo x >> w.txt; echo y > new.txt; rm d.txt; "
                        "mv m.txt moved.txt; mkdir sub");
  auto got = Internal(r);
  EXPECT_TRUE(got.contains({"w.txt", AccessMode::kWrite}));
  EXPECT_TRUE(got.contains({"new.txt", AccessMode::kCreate}));
  EXPECT_TRUE(got.contains({"d.txt", AccessMode::kDelete}));
  EXPECT_TRUE(got.contains({"m.txt", AccessMode::kDelete}));
  EXPECT_TRUE(got.contains({"moved.txt", AccessMode::kCreate}));
  EXPECT_TRUE(got.contains({"sub", AccessMode::kCreate}));
}

TEST_F(TracerTest, ExecsAcrossTheProcessTree) {
  TraceResult r = Trace("sh -c 'cut -c1 /dev/null'; true");
  std::vector<std::string> progs;
  for (const ExecRecord& e : r.execs) progs.push_back(e.program);
  EXPECT_EQ(progs, (std::vector<std::string>{"sh", "cut", "true"}));
}

TEST_F(TracerTest, ExitCodePropagates) {
  EXPECT_EQ(Trace("exit 4").exit.code, 4);
}

TEST_F(TracerTest, ExcludedPathsAreHidden) {
  WriteFile(dir_ / ".git/HEAD", "x");
  TraceResult r = Trace("cat .git/HEAD > /dev/null", {".git/"});
  EXPECT_TRUE(Internal(r).empty());
}

TEST_F(TracerTest, DeniedOpenIsAFailure) {
  if (::geteuid() == 0) GTEST_SKIP() << "root bypasses permission bits";
  WriteFile(dir_ / "secret.txt", "x");
  std::filesystem::permissions(dir_ / "secret.txt", std::filesystem::perms::none);
  TraceResult r = Trace("cat secret.txt");
  EXPECT_NE(r.exit.code, 0);
  bool found = false;
  for (const FailedAccess& f : r.failures) found |= f.path == "secret.txt";
  EXPECT_TRUE(found);
}

}  // namespace
}  // namespace phase_warden

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

// Runs as root: masking must be refused, not silently ignored.

#include <gtest/gtest.h>
#include <unistd.h>

#include <sstream>

#include "phase_warden/cli.h"
#include "phase_warden/enforcer.h"
#include "phase_warden/error.h"
#include "test_util.h"

namespace phase_warden {
namespace {

TEST(Privilege, RootIsRefused) {
  if (::geteuid() != 0) GTEST_SKIP() << "needs root";
  EXPECT_TRUE(CheckPrivilege().privileged);
  testing::TempDir dir;
  testing::WriteFile(dir / "tests/files/a", "x");
  EXPECT_THROW(ApplyMask(dir.path(), {PathRule::Make("tests/")}, "p"),
               PrivilegeError);
}

TEST(Privilege, CliEnforceExitsTwo) {
  if (::geteuid() != 0) GTEST_SKIP() << "needs root";
  testing::TempDir dir;
  std::ostringstream out, err;
  ASSERT_EQ(cli::Run({"fixture", "--kind", "xz_like", "--dest",
                      (dir / "fx").string(), "-q"}, out, err), 0);
  int rc = cli::Run({"enforce", "--spec", (dir / "fx/phase-warden.json").string(),
                     "--project", (dir / "fx").string()}, out, err);
  EXPECT_EQ(rc, 2);
  EXPECT_NE(err.str().find("refusing"), std::string::npos) << err.str();
}

}  // namespace
}  // namespace phase_warden

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

#ifndef PHASE_WARDEN_TREE_WALK_H_
#define PHASE_WARDEN_TREE_WALK_H_

#include <sys/stat.h>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "phase_warden/glob.h"

namespace phase_warden {

using TreeVisitor =
    std::function<void(const std::string& rel_path, const struct stat& st)>;

// Depth-first, name-sorted walk of everything below `root` using lstat only.
// Symlinks are reported, never followed. Excluded entries are skipped along
// with their subtrees. Unreadable directories are reported (as visited
// entries) but not descended; a warning is appended for each.
void WalkTree(const std::filesystem::path& root,
              const std::vector<PathGlob>& excludes, const TreeVisitor& visit,
              std::vector<std::string>* warnings);

// Convenience: all non-excluded relative paths under `root`.
std::vector<std::string> ListTree(const std::filesystem::path& root,
                                  const std::vector<PathGlob>& excludes = {});

}  // namespace phase_warden

#endif  // PHASE_WARDEN_TREE_WALK_H_

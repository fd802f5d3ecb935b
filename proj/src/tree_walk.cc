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

#include "phase_warden/tree_walk.h"

#include <dirent.h>
#include <sys/stat.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <string>
#include <vector>

namespace phase_warden {
namespace {

void WalkDir(const std::string& abs_dir, const std::string& rel_dir,
             const std::vector<PathGlob>& excludes, const TreeVisitor& visit,
             std::vector<std::string>* warnings) {
  DIR* dir = ::opendir(abs_dir.c_str());
  if (dir == nullptr) {
    if (warnings) {
      warnings->push_back("cannot read directory '" +
                          (rel_dir.empty() ? std::string(".") : rel_dir) +
                          "': " + std::strerror(errno));
    }
    return;
  }
  std::vector<std::string> names;
  while (const dirent* ent = ::readdir(dir)) {
    std::string_view name = ent->d_name;
    if (name == "." || name == "..") continue;
    names.emplace_back(name);
  }
  ::closedir(dir);
  std::sort(names.begin(), names.end());

  for (const std::string& name : names) {
    std::string rel = rel_dir.empty() ? name : rel_dir + "/" + name;
    if (MatchesAnyPathGlob(excludes, rel)) continue;
    std::string abs = abs_dir + "/" + name;
    struct stat st {};
    if (::lstat(abs.c_str(), &st) != 0) {
      // Vanished between readdir and lstat, or parent lost search permission.
      if (warnings && errno != ENOENT) {
        warnings->push_back("cannot stat '" + rel + "': " +
                            std::strerror(errno));
      }
      continue;
    }
    visit(rel, st);
    if (S_ISDIR(st.st_mode)) WalkDir(abs, rel, excludes, visit, warnings);
  }
}

}  // namespace

void WalkTree(const std::filesystem::path& root,
              const std::vector<PathGlob>& excludes, const TreeVisitor& visit,
              std::vector<std::string>* warnings) {
  std::string abs = root.string();
  while (abs.size() > 1 && abs.back() == '/') abs.pop_back();
  WalkDir(abs, "", excludes, visit, warnings);
}

std::vector<std::string> ListTree(const std::filesystem::path& root,
                                  const std::vector<PathGlob>& excludes) {
  std::vector<std::string> out;
  WalkTree(
      root, excludes,
      [&out](const std::string& rel, const struct stat&) { out.push_back(rel); },
      nullptr);
  return out;
}

}  // namespace phase_warden

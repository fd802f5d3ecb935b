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

#ifndef PHASE_WARDEN_GLOB_H_
#define PHASE_WARDEN_GLOB_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phase_warden {

// A case-sensitive glob over normalized project-relative paths.
//
//   `*`, `?`, `[...]`   match within one path segment
//   `**`                a whole segment; matches zero or more segments
//   trailing `/`        the named entry and its entire subtree (`p/` == `p/**`)
//   leading `./`        ignored
//
// Patterns are never absolute and never contain `..` segments.
class PathGlob {
 public:
  // Throws SpecError (without location) when the pattern is malformed.
  static PathGlob Compile(std::string_view pattern);

  // Returns a description of what is wrong with `pattern`, if anything.
  static std::optional<std::string> Check(std::string_view pattern);

  bool Matches(std::string_view rel_path) const;

  const std::string& pattern() const { return pattern_; }

  friend bool operator==(const PathGlob& a, const PathGlob& b) {
    return a.pattern_ == b.pattern_;
  }

 private:
  PathGlob() = default;

  std::string pattern_;
  std::vector<std::string> segments_;
};

// Glob over a single name (environment variable, program basename). `*`
// matches any run of characters.
bool MatchNameGlob(std::string_view pattern, std::string_view name);
std::optional<std::string> CheckNameGlob(std::string_view pattern);

// Lexically normalizes a relative path: collapses `.`, empty segments and
// `..`. Returns nullopt for absolute paths or paths escaping their base. The
// base itself normalizes to ".".
std::optional<std::string> NormalizeRelativePath(std::string_view path);

// True when `rel_path` matches any of `patterns` (each a PathGlob source).
// Malformed patterns never match.
bool MatchesAnyPathGlob(const std::vector<PathGlob>& patterns,
                        std::string_view rel_path);

std::vector<PathGlob> CompilePathGlobs(const std::vector<std::string>& patterns);

}  // namespace phase_warden

#endif  // PHASE_WARDEN_GLOB_H_

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

#include "phase_warden/glob.h"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "phase_warden/error.h"

namespace phase_warden {
namespace {

constexpr std::size_t kNpos = std::string_view::npos;

struct BracketMatch {
  bool well_formed = false;
  std::size_t end = 0;  // one past the closing ']'
  bool matched = false;
};

// `p[i]` is '['. POSIX-style class with `!`/`^` negation and ranges.
BracketMatch MatchBracket(std::string_view p, std::size_t i, unsigned char c) {
  std::size_t j = i + 1;
  bool negate = false;
  if (j < p.size() && (p[j] == '!' || p[j] == '^')) {
    negate = true;
    ++j;
  }
  bool matched = false;
  bool first = true;
  while (j < p.size() && (p[j] != ']' || first)) {
    first = false;
    unsigned char lo = static_cast<unsigned char>(p[j]);
    if (lo == '\\') {
      if (j + 1 >= p.size()) return {};
      lo = static_cast<unsigned char>(p[++j]);
    }
    if (j + 2 < p.size() && p[j + 1] == '-' && p[j + 2] != ']') {
      std::size_t k = j + 2;
      unsigned char hi = static_cast<unsigned char>(p[k]);
      if (hi == '\\') {
        if (k + 1 >= p.size()) return {};
        hi = static_cast<unsigned char>(p[++k]);
      }
      if (lo <= c && c <= hi) matched = true;
      j = k + 1;
    } else {
      if (c == lo) matched = true;
      ++j;
    }
  }
  if (j >= p.size()) return {};
  return {true, j + 1, matched != negate};
}

std::optional<std::string> CheckSegmentSyntax(std::string_view p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == '\\') {
      if (i + 1 >= p.size()) return "dangling escape at end of pattern";
      ++i;
    } else if (p[i] == '[') {
      BracketMatch b = MatchBracket(p, i, 0);
      if (!b.well_formed) return "unterminated character class";
      i = b.end - 1;
    }
  }
  return std::nullopt;
}

// Wildcard match of one segment; `*` never crosses '/' because segments never
// contain one.
bool MatchSegment(std::string_view p, std::string_view s) {
  std::size_t pi = 0, si = 0;
  std::size_t star_p = kNpos, star_s = 0;
  while (si < s.size()) {
    if (pi < p.size()) {
      const char c = p[pi];
      if (c == '*') {
        star_p = ++pi;
        star_s = si;
        continue;
      }
      if (c == '?') {
        ++pi;
        ++si;
        continue;
      }
      if (c == '[') {
        BracketMatch b =
            MatchBracket(p, pi, static_cast<unsigned char>(s[si]));
        if (b.well_formed && b.matched) {
          pi = b.end;
          ++si;
          continue;
        }
      } else if (c == '\\' && pi + 1 < p.size()) {
        if (p[pi + 1] == s[si]) {
          pi += 2;
          ++si;
          continue;
        }
      } else if (c == s[si]) {
        ++pi;
        ++si;
        continue;
      }
    }
    if (star_p != kNpos) {
      pi = star_p;
      si = ++star_s;
      continue;
    }
    return false;
  }
  while (pi < p.size() && p[pi] == '*') ++pi;
  return pi == p.size();
}

std::vector<std::string_view> SplitPath(std::string_view path) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t slash = path.find('/', start);
    if (slash == kNpos) slash = path.size();
    parts.push_back(path.substr(start, slash - start));
    start = slash + 1;
  }
  return parts;
}

bool MatchSegments(const std::vector<std::string>& pats, std::size_t i,
                   const std::vector<std::string_view>& parts, std::size_t j) {
  if (i == pats.size()) return j == parts.size();
  if (pats[i] == "**") {
    for (std::size_t k = j; k <= parts.size(); ++k) {
      if (MatchSegments(pats, i + 1, parts, k)) return true;
    }
    return false;
  }
  if (j == parts.size()) return false;
  return MatchSegment(pats[i], parts[j]) &&
         MatchSegments(pats, i + 1, parts, j + 1);
}

struct Parsed {
  std::vector<std::string> segments;
  std::optional<std::string> error;
};

Parsed ParsePathPattern(std::string_view pattern) {
  Parsed out;
  if (pattern.empty()) {
    out.error = "empty pattern";
    return out;
  }
  if (pattern.front() == '/') {
    out.error = "pattern must be project-relative, not absolute";
    return out;
  }
  std::string_view body = pattern;
  while (body.starts_with("./")) body.remove_prefix(2);
  bool subtree = false;
  if (body.ends_with('/')) {
    subtree = true;
    body.remove_suffix(1);
  }
  if (body.empty()) {
    out.error = "pattern names the project root itself";
    return out;
  }
  for (std::string_view seg : SplitPath(body)) {
    if (seg.empty()) {
      out.error = "empty path segment";
      return out;
    }
    if (seg == ".") continue;
    if (seg == "..") {
      out.error = "'..' segments are not allowed";
      return out;
    }
    if (seg != "**" && seg.find("**") != kNpos) {
      out.error = "'**' must be a whole path segment";
      return out;
    }
    if (auto err = CheckSegmentSyntax(seg)) {
      out.error = *err;
      return out;
    }
    out.segments.emplace_back(seg);
  }
  if (out.segments.empty()) {
    out.error = "pattern names the project root itself";
    return out;
  }
  if (subtree && out.segments.back() != "**") out.segments.emplace_back("**");
  return out;
}

}  // namespace

PathGlob PathGlob::Compile(std::string_view pattern) {
  Parsed parsed = ParsePathPattern(pattern);
  if (parsed.error) {
    throw SpecError("", "invalid glob '" + std::string(pattern) +
                            "': " + *parsed.error);
  }
  PathGlob glob;
  glob.pattern_ = std::string(pattern);
  glob.segments_ = std::move(parsed.segments);
  return glob;
}

std::optional<std::string> PathGlob::Check(std::string_view pattern) {
  return ParsePathPattern(pattern).error;
}

bool PathGlob::Matches(std::string_view rel_path) const {
  if (rel_path.empty() || rel_path == ".") return false;
  return MatchSegments(segments_, 0, SplitPath(rel_path), 0);
}

bool MatchNameGlob(std::string_view pattern, std::string_view name) {
  return MatchSegment(pattern, name);
}

std::optional<std::string> CheckNameGlob(std::string_view pattern) {
  if (pattern.empty()) return "empty pattern";
  if (pattern.find('/') != kNpos) return "name patterns cannot contain '/'";
  return CheckSegmentSyntax(pattern);
}

std::optional<std::string> NormalizeRelativePath(std::string_view path) {
  if (!path.empty() && path.front() == '/') return std::nullopt;
  std::vector<std::string_view> out;
  for (std::string_view seg : SplitPath(path)) {
    if (seg.empty() || seg == ".") continue;
    if (seg == "..") {
      if (out.empty()) return std::nullopt;
      out.pop_back();
      continue;
    }
    out.push_back(seg);
  }
  if (out.empty()) return std::string(".");
  std::string joined;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i) joined += '/';
    joined += out[i];
  }
  return joined;
}

bool MatchesAnyPathGlob(const std::vector<PathGlob>& patterns,
                        std::string_view rel_path) {
  for (const PathGlob& g : patterns) {
    if (g.Matches(rel_path)) return true;
  }
  return false;
}

std::vector<PathGlob> CompilePathGlobs(
    const std::vector<std::string>& patterns) {
  std::vector<PathGlob> out;
  out.reserve(patterns.size());
  for (const std::string& p : patterns) {
    if (!PathGlob::Check(p)) out.push_back(PathGlob::Compile(p));
  }
  return out;
}

}  // namespace phase_warden

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

#include "phase_warden/spec.h"

#include <openssl/evp.h>
#include <unistd.h>

#include <array>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "phase_warden/error.h"
#include "phase_warden/tree_walk.h"

namespace phase_warden {

using json = nlohmann::ordered_json;

namespace {

constexpr std::array<RuleMode, 5> kRuleModeOrder = {
    RuleMode::kRead, RuleMode::kWrite, RuleMode::kCreate, RuleMode::kDelete,
    RuleMode::kAny};

std::string At(const std::string& base, std::string_view key) {
  return base.empty() ? std::string(key) : base + "." + std::string(key);
}

std::string At(const std::string& base, std::size_t index) {
  return base + "[" + std::to_string(index) + "]";
}

void RejectUnknownKeys(const json& obj, const std::string& where,
                       std::initializer_list<std::string_view> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (std::string_view k : known) ok = ok || it.key() == k;
    if (!ok) throw SpecError(where, "unknown key '" + it.key() + "'");
  }
}

const json& RequireObject(const json& j, const std::string& where) {
  if (!j.is_object()) throw SpecError(where, "expected an object");
  return j;
}

std::string RequireString(const json& j, const std::string& where) {
  if (!j.is_string()) throw SpecError(where, "expected a string");
  return j.get<std::string>();
}

std::vector<std::string> StringList(const json& j, const std::string& where) {
  if (!j.is_array()) throw SpecError(where, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(RequireString(j[i], At(where, i)));
  }
  return out;
}

std::vector<std::string> NameGlobList(const json& j, const std::string& where) {
  std::vector<std::string> out = StringList(j, where);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (auto err = CheckNameGlob(out[i])) {
      throw SpecError(At(where, i),
                      "invalid glob '" + out[i] + "': " + *err);
    }
  }
  return out;
}

PathRule ParseRule(const json& j, const std::string& where) {
  if (j.is_string()) {
    std::string pattern = j.get<std::string>();
    if (auto err = PathGlob::Check(pattern)) {
      throw SpecError(where, "invalid glob '" + pattern + "': " + *err);
    }
    return PathRule::Make(pattern);
  }
  if (!j.is_object()) {
    throw SpecError(where, "expected a pattern string or a rule object");
  }
  RejectUnknownKeys(j, where,
                    {"pattern", "modes", "severity", "origin", "enabled"});
  if (!j.contains("pattern")) throw SpecError(where, "missing 'pattern'");
  std::string pattern = RequireString(j["pattern"], At(where, "pattern"));
  if (auto err = PathGlob::Check(pattern)) {
    throw SpecError(At(where, "pattern"),
                    "invalid glob '" + pattern + "': " + *err);
  }
  ModeSet modes = ModeSet::Any();
  if (j.contains("modes")) {
    std::vector<std::string> names = StringList(j["modes"], At(where, "modes"));
    if (names.empty()) throw SpecError(At(where, "modes"), "modes is empty");
    ModeSet set = ModeSet::Of({});
    for (std::size_t i = 0; i < names.size(); ++i) {
      auto m = RuleModeFromString(names[i]);
      if (!m) {
        throw SpecError(At(At(where, "modes"), i),
                        "unknown mode '" + names[i] + "'");
      }
      set = set.With(*m);
    }
    modes = set;
  }
  PathRule rule = PathRule::Make(pattern, modes);
  if (j.contains("severity")) {
    std::string sev = RequireString(j["severity"], At(where, "severity"));
    if (sev == "error") {
      rule.severity = Severity::kError;
    } else if (sev == "warn") {
      rule.severity = Severity::kWarn;
    } else {
      throw SpecError(At(where, "severity"), "unknown severity '" + sev + "'");
    }
  }
  if (j.contains("origin")) {
    rule.origin = RequireString(j["origin"], At(where, "origin"));
  }
  if (j.contains("enabled")) {
    if (!j["enabled"].is_boolean()) {
      throw SpecError(At(where, "enabled"), "expected a boolean");
    }
    rule.enabled = j["enabled"].get<bool>();
  }
  return rule;
}

std::vector<PathRule> ParseRules(const json& j, const std::string& where) {
  if (!j.is_array()) throw SpecError(where, "expected an array of rules");
  std::vector<PathRule> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(ParseRule(j[i], At(where, i)));
  }
  return out;
}

PhaseSpec ParsePhase(const json& j, const std::string& where) {
  RequireObject(j, where);
  RejectUnknownKeys(j, where,
                    {"name", "command", "workdir", "deny", "allow", "env",
                     "exec"});
  PhaseSpec phase;
  if (!j.contains("name")) throw SpecError(where, "missing 'name'");
  phase.name = RequireString(j["name"], At(where, "name"));
  if (!j.contains("command")) throw SpecError(where, "missing 'command'");
  phase.command = RequireString(j["command"], At(where, "command"));
  if (j.contains("workdir")) {
    phase.workdir = RequireString(j["workdir"], At(where, "workdir"));
  }
  if (j.contains("deny")) {
    phase.permissions.deny = ParseRules(j["deny"], At(where, "deny"));
  }
  if (j.contains("allow")) {
    phase.permissions.allow = ParseRules(j["allow"], At(where, "allow"));
  }
  if (j.contains("env")) {
    std::string env_at = At(where, "env");
    const json& env = RequireObject(j["env"], env_at);
    RejectUnknownKeys(env, env_at, {"deny_read", "deny_modify"});
    if (env.contains("deny_read")) {
      phase.env_policy.deny_read =
          NameGlobList(env["deny_read"], At(env_at, "deny_read"));
    }
    if (env.contains("deny_modify")) {
      phase.env_policy.deny_modify =
          NameGlobList(env["deny_modify"], At(env_at, "deny_modify"));
    }
  }
  if (j.contains("exec")) {
    std::string exec_at = At(where, "exec");
    const json& exec = RequireObject(j["exec"], exec_at);
    RejectUnknownKeys(exec, exec_at, {"denied_programs", "allowed_programs"});
    if (exec.contains("denied_programs")) {
      phase.exec_policy.denied_programs =
          NameGlobList(exec["denied_programs"], At(exec_at, "denied_programs"));
    }
    if (exec.contains("allowed_programs")) {
      phase.exec_policy.allowed_programs = NameGlobList(
          exec["allowed_programs"], At(exec_at, "allowed_programs"));
    }
  }
  return phase;
}

json RuleToJson(const PathRule& rule) {
  const bool plain = rule.modes.IsAny() && rule.severity == Severity::kError &&
                     rule.origin.empty() && rule.enabled;
  if (plain) return rule.pattern();
  json j = json::object();
  j["pattern"] = rule.pattern();
  json modes = json::array();
  for (RuleMode m : rule.modes.ToVector()) modes.push_back(ToString(m));
  j["modes"] = modes;
  if (rule.severity != Severity::kError) j["severity"] = ToString(rule.severity);
  if (!rule.origin.empty()) j["origin"] = rule.origin;
  if (!rule.enabled) j["enabled"] = false;
  return j;
}

std::string Sha256Hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

}  // namespace

std::string_view ToString(AccessMode mode) {
  switch (mode) {
    case AccessMode::kRead: return "read";
    case AccessMode::kWrite: return "write";
    case AccessMode::kCreate: return "create";
    case AccessMode::kDelete: return "delete";
    case AccessMode::kTouch: return "touch";
    case AccessMode::kExec: return "exec";
  }
  return "?";
}

std::optional<AccessMode> AccessModeFromString(std::string_view s) {
  for (AccessMode m : {AccessMode::kRead, AccessMode::kWrite,
                       AccessMode::kCreate, AccessMode::kDelete,
                       AccessMode::kTouch, AccessMode::kExec}) {
    if (ToString(m) == s) return m;
  }
  return std::nullopt;
}

std::string_view ToString(RuleMode mode) {
  switch (mode) {
    case RuleMode::kRead: return "read";
    case RuleMode::kWrite: return "write";
    case RuleMode::kCreate: return "create";
    case RuleMode::kDelete: return "delete";
    case RuleMode::kAny: return "any";
  }
  return "?";
}

std::optional<RuleMode> RuleModeFromString(std::string_view s) {
  for (RuleMode m : kRuleModeOrder) {
    if (ToString(m) == s) return m;
  }
  return std::nullopt;
}

std::string_view ToString(Severity severity) {
  return severity == Severity::kError ? "error" : "warn";
}

std::optional<Severity> SeverityFromString(std::string_view s) {
  if (s == "error") return Severity::kError;
  if (s == "warn") return Severity::kWarn;
  return std::nullopt;
}

ModeSet ModeSet::Of(std::initializer_list<RuleMode> modes) {
  std::uint8_t bits = 0;
  for (RuleMode m : modes) bits |= static_cast<std::uint8_t>(m);
  if (bits & static_cast<std::uint8_t>(RuleMode::kAny)) {
    bits = static_cast<std::uint8_t>(RuleMode::kAny);
  }
  return ModeSet(bits);
}

ModeSet ModeSet::With(RuleMode mode) const {
  std::uint8_t bits = bits_ | static_cast<std::uint8_t>(mode);
  if (bits & static_cast<std::uint8_t>(RuleMode::kAny)) {
    bits = static_cast<std::uint8_t>(RuleMode::kAny);
  }
  return ModeSet(bits);
}

bool ModeSet::Covers(AccessMode mode) const {
  if (IsAny()) return true;
  switch (mode) {
    case AccessMode::kRead: return Contains(RuleMode::kRead);
    case AccessMode::kWrite: return Contains(RuleMode::kWrite);
    case AccessMode::kCreate: return Contains(RuleMode::kCreate);
    case AccessMode::kDelete: return Contains(RuleMode::kDelete);
    case AccessMode::kTouch:
    case AccessMode::kExec: return false;
  }
  return false;
}

std::vector<RuleMode> ModeSet::ToVector() const {
  std::vector<RuleMode> out;
  for (RuleMode m : kRuleModeOrder) {
    if (Contains(m)) out.push_back(m);
  }
  return out;
}

PathRule PathRule::Make(std::string_view pattern, ModeSet modes) {
  if (modes.empty()) throw SpecError("", "rule modes must not be empty");
  return PathRule{PathGlob::Compile(pattern), modes, Severity::kError, "",
                  true};
}

const PhaseSpec* PipelineSpec::FindPhase(std::string_view name) const {
  for (const PhaseSpec& p : phases) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

void NormalizeSpec(PipelineSpec& spec) {
  for (std::size_t i = 0; i < spec.phases.size(); ++i) {
    PhaseSpec& phase = spec.phases[i];
    auto wd = NormalizeRelativePath(phase.workdir);
    if (!wd) {
      throw SpecError(At(At("phases", i), "workdir"),
                      "workdir '" + phase.workdir +
                          "' escapes the project root");
    }
    phase.workdir = *wd;
  }
}

void ValidateSpec(const PipelineSpec& spec) {
  if (spec.version != kSpecVersion) {
    throw SpecError("version", "unsupported schema version " +
                                   std::to_string(spec.version));
  }
  if (spec.phases.empty()) {
    throw SpecError("phases", "at least one phase is required");
  }
  for (std::size_t i = 0; i < spec.global_excludes.size(); ++i) {
    if (auto err = PathGlob::Check(spec.global_excludes[i])) {
      throw SpecError(At("global_excludes", i),
                      "invalid glob '" + spec.global_excludes[i] + "': " + *err);
    }
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < spec.phases.size(); ++i) {
    const PhaseSpec& phase = spec.phases[i];
    const std::string where = At("phases", i);
    if (phase.name.empty()) throw SpecError(At(where, "name"), "empty phase name");
    if (!seen.insert(phase.name).second) {
      throw SpecError(At(where, "name"),
                      "duplicate phase name '" + phase.name + "'");
    }
    if (phase.command.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw SpecError(At(where, "command"),
                      "phase '" + phase.name + "' has an empty command");
    }
    if (!NormalizeRelativePath(phase.workdir)) {
      throw SpecError(At(where, "workdir"),
                      "workdir '" + phase.workdir +
                          "' escapes the project root");
    }
    if (phase.exec_policy.allowed_programs &&
        phase.exec_policy.allowed_programs->empty()) {
      throw SpecError(At(At(where, "exec"), "allowed_programs"),
                      "allowed_programs must be non-empty when present");
    }
  }
}

PipelineSpec ParseSpec(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SpecError("", std::string("malformed JSON: ") + e.what());
  }
  RequireObject(doc, "");
  RejectUnknownKeys(doc, "", {"version", "global_excludes", "phases"});
  PipelineSpec spec;
  if (!doc.contains("version")) throw SpecError("version", "missing 'version'");
  if (!doc["version"].is_number_integer()) {
    throw SpecError("version", "expected an integer");
  }
  spec.version = doc["version"].get<int>();
  if (spec.version != kSpecVersion) {
    throw SpecError("version", "unsupported schema version " +
                                   std::to_string(spec.version));
  }
  if (doc.contains("global_excludes")) {
    spec.global_excludes = StringList(doc["global_excludes"], "global_excludes");
  }
  if (!doc.contains("phases")) throw SpecError("phases", "missing 'phases'");
  if (!doc["phases"].is_array()) {
    throw SpecError("phases", "expected an array of phases");
  }
  for (std::size_t i = 0; i < doc["phases"].size(); ++i) {
    spec.phases.push_back(ParsePhase(doc["phases"][i], At("phases", i)));
  }
  ValidateSpec(spec);
  NormalizeSpec(spec);
  return spec;
}

PipelineSpec LoadSpecFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError("", "cannot read spec file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseSpec(buf.str());
}

std::string SerializeSpec(const PipelineSpec& spec) {
  json doc = json::object();
  doc["version"] = spec.version;
  if (!spec.global_excludes.empty()) doc["global_excludes"] = spec.global_excludes;
  json phases = json::array();
  for (const PhaseSpec& phase : spec.phases) {
    json p = json::object();
    p["name"] = phase.name;
    p["command"] = phase.command;
    if (phase.workdir != ".") p["workdir"] = phase.workdir;
    if (!phase.permissions.deny.empty()) {
      json rules = json::array();
      for (const PathRule& r : phase.permissions.deny) rules.push_back(RuleToJson(r));
      p["deny"] = rules;
    }
    if (!phase.permissions.allow.empty()) {
      json rules = json::array();
      for (const PathRule& r : phase.permissions.allow) rules.push_back(RuleToJson(r));
      p["allow"] = rules;
    }
    if (!phase.env_policy.empty()) {
      json env = json::object();
      if (!phase.env_policy.deny_read.empty()) env["deny_read"] = phase.env_policy.deny_read;
      if (!phase.env_policy.deny_modify.empty()) env["deny_modify"] = phase.env_policy.deny_modify;
      p["env"] = env;
    }
    if (!phase.exec_policy.empty()) {
      json exec = json::object();
      if (!phase.exec_policy.denied_programs.empty()) {
        exec["denied_programs"] = phase.exec_policy.denied_programs;
      }
      if (phase.exec_policy.allowed_programs) {
        exec["allowed_programs"] = *phase.exec_policy.allowed_programs;
      }
      p["exec"] = exec;
    }
    phases.push_back(std::move(p));
  }
  doc["phases"] = std::move(phases);
  return doc.dump(2) + "\n";
}

std::string SpecDigest(const PipelineSpec& spec) {
  return Sha256Hex(SerializeSpec(spec));
}

std::vector<SpecWarning> ValidateAgainstProject(
    const PipelineSpec& spec, const std::filesystem::path& project_root) {
  std::error_code ec;
  if (!std::filesystem::is_directory(project_root, ec)) {
    throw ProjectError("project root '" + project_root.string() +
                       "' does not exist or is not a directory");
  }
  if (::access(project_root.c_str(), R_OK | X_OK) != 0) {
    throw ProjectError("project root '" + project_root.string() +
                       "' is not readable");
  }
  const std::vector<std::string> tree =
      ListTree(project_root, CompilePathGlobs(spec.global_excludes));

  std::vector<SpecWarning> warnings;
  for (std::size_t i = 0; i < spec.phases.size(); ++i) {
    const PhaseSpec& phase = spec.phases[i];
    const std::string where = At("phases", i);
    std::error_code wd_ec;
    if (!std::filesystem::is_directory(project_root / phase.workdir, wd_ec)) {
      warnings.push_back({At(where, "workdir"),
                          "workdir '" + phase.workdir + "' does not exist"});
    }
    for (std::size_t r = 0; r < phase.permissions.deny.size(); ++r) {
      const PathRule& rule = phase.permissions.deny[r];
      bool any = false;
      for (const std::string& rel : tree) {
        if (rule.glob.Matches(rel)) {
          any = true;
          break;
        }
      }
      if (!any) {
        warnings.push_back({At(At(where, "deny"), r),
                            "pattern '" + rule.pattern() + "' matches nothing"});
      }
    }
    for (std::size_t r = 0; r < phase.permissions.deny.size(); ++r) {
      const PathRule& deny = phase.permissions.deny[r];
      for (const PathRule& allow : phase.permissions.allow) {
        if (allow.pattern() == deny.pattern() && allow.modes == deny.modes) {
          warnings.push_back({At(At(where, "deny"), r),
                              "contradictory rule: '" + deny.pattern() +
                                  "' is both allowed and denied; deny wins"});
        }
      }
    }
  }
  return warnings;
}

}  // namespace phase_warden

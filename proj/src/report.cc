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

#include "phase_warden/report.h"

#include <ctime>
#include <filesystem>

#include "json.hpp"
#include "phase_warden/error.h"

namespace phase_warden {
namespace {

using Json = nlohmann::ordered_json;

std::string SubjectText(const Violation& v, bool basename) {
  switch (v.subject_kind) {
    case SubjectKind::kFile:
      return basename ? std::filesystem::path(v.subject).filename().string()
                      : v.subject;
    case SubjectKind::kEnv:
      return "env " + v.subject;
    case SubjectKind::kExec:
      return "program " + v.subject;
  }
  return v.subject;
}

Json ModesJson(const ModeSet& modes) {
  Json out = Json::array();
  for (RuleMode m : modes.ToVector()) out.push_back(ToString(m));
  return out;
}

ModeSet ModesFromJson(const Json& j) {
  std::optional<ModeSet> modes;
  for (const Json& m : j) {
    std::optional<RuleMode> mode = RuleModeFromString(m.get<std::string>());
    if (!mode) throw Error("unknown rule mode '" + m.get<std::string>() + "'");
    modes = modes ? modes->With(*mode) : ModeSet::Of({*mode});
  }
  if (!modes) throw Error("rule modes must not be empty");
  return *modes;
}

template <typename T, typename F>
T Parse(const Json& j, const char* what, F from_string) {
  const std::string s = j.get<std::string>();
  std::optional<T> v = from_string(s);
  if (!v) throw Error(std::string("unknown ") + what + " '" + s + "'");
  return *v;
}

Json ViolationJson(const Violation& v) {
  Json j;
  j["phase"] = v.phase_name;
  j["subject"] = v.subject;
  j["subject_kind"] = ToString(v.subject_kind);
  j["mode"] = ToString(v.mode);
  Json rule;
  rule["pattern"] = v.rule.pattern;
  rule["modes"] = ModesJson(v.rule.modes);
  rule["policy"] = v.rule.policy;
  if (!v.rule.origin.empty()) rule["origin"] = v.rule.origin;
  j["rule"] = std::move(rule);
  j["evidence"] = ToString(v.evidence);
  j["severity"] = ToString(v.severity);
  j["detail"] = v.detail;
  return j;
}

Violation ViolationFrom(const Json& j) {
  Violation v;
  v.phase_name = j.at("phase").get<std::string>();
  v.subject = j.at("subject").get<std::string>();
  v.subject_kind = Parse<SubjectKind>(j.at("subject_kind"), "subject kind",
                                      SubjectKindFromString);
  v.mode = Parse<AccessMode>(j.at("mode"), "mode", AccessModeFromString);
  const Json& rule = j.at("rule");
  v.rule.pattern = rule.at("pattern").get<std::string>();
  v.rule.modes = ModesFromJson(rule.at("modes"));
  v.rule.policy = rule.at("policy").get<std::string>();
  v.rule.origin = rule.value("origin", "");
  v.evidence = Parse<Evidence>(j.at("evidence"), "evidence", EvidenceFromString);
  v.severity = Parse<Severity>(j.at("severity"), "severity", SeverityFromString);
  v.detail = j.value("detail", "");
  return v;
}

}  // namespace

std::string FormatTimestamp(std::chrono::system_clock::time_point t) {
  const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                      t.time_since_epoch()).count();
  std::time_t secs = static_cast<std::time_t>(ns / 1'000'000'000);
  long frac = static_cast<long>(ns % 1'000'000'000);
  if (frac < 0) {
    frac += 1'000'000'000;
    --secs;
  }
  std::tm tm {};
  ::gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%09ldZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, frac);
  return buf;
}

std::chrono::system_clock::time_point ParseTimestamp(std::string_view s) {
  std::tm tm {};
  long frac = 0;
  const std::string str(s);
  if (std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%9ldZ", &tm.tm_year,
                  &tm.tm_mon, &tm.tm_mday, &tm.tm_hour, &tm.tm_min, &tm.tm_sec,
                  &frac) != 7) {
    throw Error("malformed timestamp '" + str + "'");
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  const std::time_t secs = ::timegm(&tm);
  return std::chrono::system_clock::time_point(
      std::chrono::duration_cast<std::chrono::system_clock::duration>(
          std::chrono::seconds(secs) + std::chrono::nanoseconds(frac)));
}

std::string FormatViolation(const Violation& v, bool basename) {
  std::string line = v.phase_name + ": denied " + std::string(ToString(v.mode)) +
                     " access to " + SubjectText(v, basename) +
                     " (rule: " + v.rule.pattern + ")";
  if (v.severity == Severity::kWarn) line += " [warn]";
  return line;
}

std::string FormatTextReport(const ViolationReport& report, bool basename) {
  std::string out;
  for (const Violation& v : report.violations) {
    out += FormatViolation(v, basename);
    out += '\n';
  }
  return out;
}

std::string ReportToJson(const ViolationReport& report) {
  Json j;
  j["spec_digest"] = report.spec_digest;
  j["generated_at"] = FormatTimestamp(report.generated_at);
  j["aborted_at"] = report.aborted_at ? Json(*report.aborted_at) : Json(nullptr);
  Json phases = Json::array();
  for (const PhaseRunInfo& p : report.phases) {
    Json pj;
    pj["phase"] = p.name;
    pj["exit_code"] = p.exit_code;
    pj["backend"] = ToString(p.backend);
    pj["started_at"] = FormatTimestamp(p.started_at);
    pj["duration_ns"] = p.duration.count();
    pj["warnings"] = p.warnings;
    const ViolationCounts c = report.CountsFor(p.name);
    pj["counts"] = {{"file", c.file}, {"env", c.env}, {"exec", c.exec},
                    {"total", c.total()}};
    Json vs = Json::array();
    for (const Violation& v : report.violations) {
      if (v.phase_name == p.name) vs.push_back(ViolationJson(v));
    }
    pj["violations"] = std::move(vs);
    phases.push_back(std::move(pj));
  }
  j["phases"] = std::move(phases);
  j["total_violations"] = report.violations.size();
  j["notes"] = report.notes;
  return j.dump(2) + "\n";
}

ViolationReport ReportFromJson(std::string_view text) {
  try {
    Json j = Json::parse(text);
    ViolationReport report;
    report.spec_digest = j.at("spec_digest").get<std::string>();
    report.generated_at = ParseTimestamp(j.at("generated_at").get<std::string>());
    if (!j.at("aborted_at").is_null()) {
      report.aborted_at = j.at("aborted_at").get<std::string>();
    }
    for (const Json& pj : j.at("phases")) {
      PhaseRunInfo p;
      p.name = pj.at("phase").get<std::string>();
      p.exit_code = pj.at("exit_code").get<int>();
      p.backend = Parse<Backend>(pj.at("backend"), "backend", BackendFromString);
      p.started_at = ParseTimestamp(pj.at("started_at").get<std::string>());
      p.duration = std::chrono::nanoseconds(pj.at("duration_ns").get<std::int64_t>());
      p.warnings = pj.at("warnings").get<std::vector<std::string>>();
      for (const Json& vj : pj.at("violations")) {
        report.violations.push_back(ViolationFrom(vj));
      }
      report.phases.push_back(std::move(p));
    }
    report.notes = j.value("notes", std::vector<std::string>{});
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed violation report: ") + e.what());
  }
}

}  // namespace phase_warden

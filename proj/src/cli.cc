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

#include "phase_warden/cli.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <system_error>

#include "CLI11.hpp"
#include "phase_warden/bench.h"
#include "phase_warden/checker.h"
#include "phase_warden/enforcer.h"
#include "phase_warden/error.h"
#include "phase_warden/inference.h"
#include "phase_warden/report.h"
#include "phase_warden/runner.h"
#include "phase_warden/spec.h"
#include "phase_warden/workspace.h"

namespace phase_warden::cli {
namespace {

struct Common {
  bool quiet = false;
};

struct CheckArgs {
  std::string spec;
  std::string project = ".";
  std::string backend = "auto";
  std::string report;
  std::string format = "both";
  bool basename = false;
  bool keep_going = false;
  std::vector<std::string> setenv;
};

struct EnforceArgs {
  CheckArgs check;
  std::string phases;
};

struct InferArgs {
  std::string project = ".";
  std::string out;
  std::string heuristics;
};

struct FixtureArgs {
  std::string kind;
  std::string dest;
  std::uint64_t seed = 1;
};

struct BenchArgs {
  std::string corpus;
  std::string strategy = "reference";
  std::string backend = "auto";
  std::string json;
};

struct RestoreArgs {
  std::string project = ".";
};

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw ProjectError("cannot write '" + path.string() + "'");
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

RunOptions MakeRunOptions(const CheckArgs& a) {
  RunOptions options;
  std::optional<Backend> backend = BackendFromString(a.backend);
  if (!backend) throw SpecError("--backend", "unknown backend '" + a.backend + "'");
  options.backend = *backend;
  options.stop_on_phase_failure = !a.keep_going;
  for (const std::string& kv : a.setenv) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw SpecError("--setenv", "expected NAME=VALUE, got '" + kv + "'");
    }
    options.extra_env[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return options;
}

void PrintSpecWarnings(const PipelineSpec& spec, const std::filesystem::path& root,
                       const Common& common, std::ostream& err) {
  std::vector<SpecWarning> warnings = ValidateAgainstProject(spec, root);
  if (common.quiet) return;
  for (const SpecWarning& w : warnings) {
    err << "warning: " << (w.location.empty() ? "" : w.location + ": ")
        << w.message << "\n";
  }
}

void PrintBackendBanner(PhaseRunner& runner, const Common& common,
                        std::ostream& err) {
  if (common.quiet) return;
  std::string fallback;
  Backend used = runner.EffectiveBackend(&fallback);
  if (used == Backend::kTrace) {
    err << "backend: trace (ptrace)\n";
    return;
  }
  const AtimeProbe& probe = runner.atime_probe();
  err << "backend: snapshot; access times "
      << (probe.reliable ? "reliable" : "NOT reliable") << " (" << probe.reason
      << ")\n";
}

// Writes the requested report files and prints the violation lines.
void EmitReport(const ViolationReport& report, const CheckArgs& a,
                const std::filesystem::path& work_dir, const Common& common,
                std::ostream& err) {
  if (a.format != "text" && a.format != "json" && a.format != "both") {
    throw SpecError("--format", "unknown format '" + a.format + "'");
  }
  std::filesystem::path path =
      a.report.empty() ? work_dir / "report.txt" : std::filesystem::path(a.report);
  const std::string text = FormatTextReport(report, a.basename);
  if (a.format == "text") {
    WriteText(path, text);
  } else if (a.format == "json") {
    WriteText(path, ReportToJson(report));
  } else {
    WriteText(path, text);
    WriteText(path.string() + ".json", ReportToJson(report));
  }
  if (!common.quiet) {
    for (const PhaseRunInfo& p : report.phases) {
      for (const std::string& w : p.warnings) {
        err << "warning: " << p.name << ": " << w << "\n";
      }
      if (p.exit_code != 0) {
        err << "phase " << p.name << " exited with code " << p.exit_code << "\n";
      }
    }
    if (report.aborted_at) {
      err << "pipeline stopped after failing phase " << *report.aborted_at << "\n";
    }
  }
  err << text;
  if (!common.quiet) {
    err << report.violations.size() << " violation(s); report written to "
        << path.string() << "\n";
  }
}

int CmdCheck(const CheckArgs& a, const Common& common, std::ostream&,
             std::ostream& err) {
  PipelineSpec spec = LoadSpecFile(a.spec);
  RunOptions options = MakeRunOptions(a);
  PrintSpecWarnings(spec, a.project, common, err);
  PhaseRunner runner(a.project, options, spec.global_excludes);
  PrintBackendBanner(runner, common, err);
  RunReport run;
  {
    ProjectLock lock = ProjectLock::Acquire(runner.work_dir());
    run.spec_digest = SpecDigest(spec);
    for (const PhaseSpec& phase : spec.phases) {
      run.observations.push_back(runner.RunPhase(phase));
      if (options.stop_on_phase_failure &&
          run.observations.back().result.exit_code != 0) {
        run.aborted_at = phase.name;
        break;
      }
    }
  }
  ViolationReport report = CheckRun(spec, run);
  EmitReport(report, a, runner.work_dir(), common, err);
  return report.empty() ? kExitClean : kExitViolations;
}

int CmdEnforce(const EnforceArgs& a, const Common& common, std::ostream&,
               std::ostream& err) {
  PipelineSpec spec = LoadSpecFile(a.check.spec);
  std::set<std::string> selected;
  if (a.phases.empty()) {
    for (const PhaseSpec& p : spec.phases) selected.insert(p.name);
  } else {
    for (const std::string& name : SplitList(a.phases)) {
      if (spec.FindPhase(name) == nullptr) {
        throw SpecError("--phases", "no phase named '" + name + "'");
      }
      selected.insert(name);
    }
  }
  PrivilegeStatus priv = CheckPrivilege();
  if (priv.privileged && !selected.empty()) {
    throw PrivilegeError("refusing to enforce: " + priv.reason +
                         ", so permission masks would not be honored");
  }
  RunOptions options = MakeRunOptions(a.check);
  PrintSpecWarnings(spec, a.check.project, common, err);
  PhaseRunner runner(a.check.project, options, spec.global_excludes);
  PrintBackendBanner(runner, common, err);
  RunReport run;
  std::vector<DeniedAttempt> denied;
  {
    ProjectLock lock = ProjectLock::Acquire(runner.work_dir());
    run.spec_digest = SpecDigest(spec);
    for (const PhaseSpec& phase : spec.phases) {
      if (selected.contains(phase.name)) {
        EnforcementResult r = EnforcePhase(runner, phase);
        if (!common.quiet) {
          err << "enforced " << phase.name << ": masked " << r.mask.entries.size()
              << " path(s)\n";
          for (const std::string& w : r.warnings) {
            err << "warning: " << phase.name << ": " << w << "\n";
          }
        }
        denied.insert(denied.end(), r.denied.begin(), r.denied.end());
        run.observations.push_back(std::move(r.observation));
      } else {
        run.observations.push_back(runner.RunPhase(phase));
      }
      if (options.stop_on_phase_failure &&
          run.observations.back().result.exit_code != 0) {
        run.aborted_at = phase.name;
        break;
      }
    }
  }
  ViolationReport report = CheckRun(spec, run);
  EmitReport(report, a.check, runner.work_dir(), common, err);
  for (const DeniedAttempt& d : denied) {
    err << d.phase_name << ": blocked access to " << d.rel_path << " (via "
        << ToString(d.observed_via) << ")\n";
  }
  return report.empty() && denied.empty() ? kExitClean : kExitViolations;
}

int CmdInfer(const InferArgs& a, const Common& common, std::ostream& out,
             std::ostream& err) {
  HeuristicSelection selection =
      a.heuristics.empty() ? DefaultHeuristics() : ParseHeuristicList(a.heuristics);
  InferenceOutcome outcome = InferSpec(a.project, selection);
  const std::filesystem::path path =
      a.out.empty() ? std::filesystem::path(a.project) / kFixtureSpecFile
                    : std::filesystem::path(a.out);
  WriteText(path, SerializeSpec(outcome.draft));
  const std::filesystem::path sidecar = path.string() + ".rationale";
  WriteText(sidecar, FormatRationale(outcome));
  for (const std::string& w : outcome.warnings) err << "warning: " << w << "\n";
  if (!common.quiet) {
    out << "wrote draft spec with " << outcome.draft.phases.size()
        << " phase(s) to " << path.string() << "\n"
        << "rationale: " << sidecar.string() << "\n";
  }
  return kExitClean;
}

int CmdFixture(const FixtureArgs& a, const Common& common, std::ostream& out,
               std::ostream&) {
  std::optional<FixtureKind> kind = FixtureKindFromString(a.kind);
  if (!kind) throw SpecError("--kind", "unknown fixture kind '" + a.kind + "'");
  GroundTruth truth = GenerateFixture(*kind, a.dest, a.seed);
  if (!common.quiet) {
    out << "wrote " << truth.fixture_id << " to " << a.dest << " ("
        << truth.expected_violations.size() << " expected violation(s))\n";
  }
  return kExitClean;
}

int CmdBench(const BenchArgs& a, const Common& common, std::ostream& out,
             std::ostream& err) {
  std::optional<SpecStrategy> strategy = SpecStrategyFromString(a.strategy);
  if (!strategy) {
    throw SpecError("--strategy", "unknown strategy '" + a.strategy + "'");
  }
  std::optional<Backend> backend = BackendFromString(a.backend);
  if (!backend) throw SpecError("--backend", "unknown backend '" + a.backend + "'");
  std::vector<std::filesystem::path> fixtures = ListCorpus(a.corpus);
  if (fixtures.empty()) {
    for (FixtureKind kind : AllFixtureKinds()) {
      GenerateFixture(kind, std::filesystem::path(a.corpus) / ToString(kind));
    }
    if (!common.quiet) err << "generated corpus in " << a.corpus << "\n";
    fixtures = ListCorpus(a.corpus);
  }
  BenchResult result = EvaluateChecker(fixtures, *strategy, *backend);
  for (const std::string& w : result.warnings) err << "warning: " << w << "\n";
  out << FormatMetricsTable(result);
  if (!a.json.empty()) WriteText(a.json, BenchResultToJson(result));
  return kExitClean;
}

int CmdRestore(const RestoreArgs& a, const Common& common, std::ostream& out,
               std::ostream& err) {
  const std::filesystem::path work_dir = ResolveWorkDir(a.project);
  const std::filesystem::path state_path = work_dir / kMaskStateFile;
  std::optional<MaskState> state = LoadMaskState(state_path);
  if (!state) {
    if (!common.quiet) out << "no mask to restore\n";
    return kExitClean;
  }
  state->restored = false;
  std::vector<std::string> warnings = RestoreMask(*state);
  for (const std::string& w : warnings) err << "warning: " << w << "\n";
  std::filesystem::remove(state_path);
  if (!common.quiet) {
    out << "restored " << state->entries.size() << " path(s) masked for phase "
        << state->phase_name << "\n";
  }
  return kExitClean;
}

void AddCheckOptions(CLI::App* cmd, CheckArgs& a) {
  cmd->add_option("--spec", a.spec, "pipeline spec file")->required();
  cmd->add_option("--project", a.project, "project root (default: .)");
  cmd->add_option("--backend", a.backend, "snapshot, trace or auto")
      ->check(CLI::IsMember({"snapshot", "trace", "auto"}));
  cmd->add_option("--report", a.report,
                  "report file (default: <work dir>/report.txt)");
  cmd->add_option("--format", a.format, "text, json or both (json goes to REPORT.json)")
      ->check(CLI::IsMember({"text", "json", "both"}));
  cmd->add_flag("--basename", a.basename, "shorten file paths to file names");
  cmd->add_flag("--keep-going", a.keep_going,
                "run later phases even after one fails");
  cmd->add_option("--setenv", a.setenv, "NAME=VALUE added to phase environments");
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Checks and enforces per-phase permissions of build pipelines.",
               "phase-warden"};
  app.require_subcommand(1);
  Common common;
  app.add_flag("-q,--quiet", common.quiet,
               "print only violations and errors");

  CheckArgs check;
  CLI::App* check_cmd = app.add_subcommand(
      "check", "run the pipeline under monitoring and report violations");
  AddCheckOptions(check_cmd, check);

  EnforceArgs enforce;
  CLI::App* enforce_cmd = app.add_subcommand(
      "enforce", "run the pipeline with denied paths made inaccessible");
  AddCheckOptions(enforce_cmd, enforce.check);
  enforce_cmd->add_option("--phases", enforce.phases,
                          "comma-separated phases to enforce (default: all)");

  InferArgs infer;
  CLI::App* infer_cmd =
      app.add_subcommand("infer", "draft a spec from the project layout");
  infer_cmd->add_option("--project", infer.project, "project root (default: .)");
  infer_cmd->add_option("--out", infer.out,
                        "draft spec path (default: <project>/phase-warden.json)");
  infer_cmd->add_option("--heuristics", infer.heuristics,
                        "comma-separated heuristic ids to enable (H1-H4)");

  FixtureArgs fixture;
  CLI::App* fixture_cmd =
      app.add_subcommand("fixture", "generate a benchmark fixture project");
  fixture_cmd->add_option("--kind", fixture.kind,
                          "safe, xz_like, env_exfil or exec_injection")
      ->required();
  fixture_cmd->add_option("--dest", fixture.dest, "empty target directory")
      ->required();
  fixture_cmd->add_option("--seed", fixture.seed, "generator seed (default: 1)");

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand(
      "bench", "score the checker against a fixture corpus");
  bench_cmd->add_option("--corpus", bench.corpus,
                        "corpus directory (generated when empty)")
      ->required();
  bench_cmd->add_option("--strategy", bench.strategy, "reference or inferred");
  bench_cmd->add_option("--backend", bench.backend, "snapshot, trace or auto");
  bench_cmd->add_option("--json", bench.json, "also write metrics as JSON");

  RestoreArgs restore;
  CLI::App* restore_cmd = app.add_subcommand(
      "restore", "restore permissions left masked by an interrupted run");
  restore_cmd->add_option("--project", restore.project, "project root (default: .)");

  for (CLI::App* sub : {check_cmd, enforce_cmd, infer_cmd, fixture_cmd,
                        bench_cmd, restore_cmd}) {
    sub->fallthrough();
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitClean : kExitUsage;
  }

  try {
    if (*check_cmd) return CmdCheck(check, common, out, err);
    if (*enforce_cmd) return CmdEnforce(enforce, common, out, err);
    if (*infer_cmd) return CmdInfer(infer, common, out, err);
    if (*fixture_cmd) return CmdFixture(fixture, common, out, err);
    if (*bench_cmd) return CmdBench(bench, common, out, err);
    if (*restore_cmd) return CmdRestore(restore, common, out, err);
  } catch (const SpecError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ProjectError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const PrivilegeError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const StaleReportError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace phase_warden::cli

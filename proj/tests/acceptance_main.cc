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

// End-to-end acceptance run. Prints one line per criterion and exits
// non-zero if any fails. Must run as an unprivileged user (enforcement
// criteria rely on permission bits being honored).

#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "phase_warden/bench.h"
#include "phase_warden/checker.h"
#include "phase_warden/enforcer.h"
#include "phase_warden/inference.h"
#include "phase_warden/runner.h"
#include "phase_warden/shell.h"
#include "phase_warden/snapshot.h"
#include "phase_warden/tracer.h"
#include "test_util.h"

namespace phase_warden {
namespace {

using testing::TempDir;
using testing::WriteFile;
using Clock = std::chrono::steady_clock;

double Since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

// Collects failure reasons for one criterion.
class Verdict {
 public:
  void Expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void Note(const std::string& s) { notes_.push_back(s); }
  bool ok() const { return failures_.empty(); }
  std::string Summary() const {
    std::string out;
    for (const std::string& f : failures_) out += (out.empty() ? "" : "; ") + f;
    for (const std::string& n : notes_) out += (out.empty() ? "" : "; ") + n;
    return out;
  }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

using Triple = std::tuple<std::string, std::string, SubjectKind>;

std::set<Triple> Triples(const ViolationReport& r) {
  std::set<Triple> out;
  for (const Violation& v : r.violations) {
    out.emplace(v.phase_name, v.subject, v.subject_kind);
  }
  return out;
}

RunOptions WithBackend(Backend b, const EnvMap& env = {}) {
  RunOptions o;
  o.backend = b;
  o.extra_env = env;
  return o;
}

std::vector<Backend> AvailableBackends() {
  std::vector<Backend> out = {Backend::kSnapshot};
  if (ProbeTracing().available) out.push_back(Backend::kTrace);
  return out;
}

// C1: the reference spec on the xz_like fixture yields exactly the two
// payload reads in compile.
void CriterionXzReproduction(Verdict& v) {
  const std::set<Triple> expected = {
      {"compile", kXzBadPayload, SubjectKind::kFile},
      {"compile", kXzGoodPayload, SubjectKind::kFile}};
  for (Backend b : AvailableBackends()) {
    TempDir dir;
    GenerateFixture(FixtureKind::kXzLike, dir / "fx");
    PipelineSpec spec = LoadSpecFile(dir / "fx" / kFixtureSpecFile);
    auto t0 = Clock::now();
    ViolationReport report = CheckRun(spec, RunPipeline(spec, dir / "fx", WithBackend(b)));
    double secs = Since(t0);
    std::string name(ToString(b));
    v.Expect(Triples(report) == expected,
             name + ": got " + std::to_string(report.violations.size()) +
                 " violations, not the two payload reads");
    v.Expect(secs < 10.0, name + ": took " + std::to_string(secs) + " s");
    v.Note(name + " " + std::to_string(secs).substr(0, 5) + " s");
  }
}

// C2: denying tests/files/ to configure as well adds configure findings.
void CriterionConfigureFalseAlarms(Verdict& v) {
  for (Backend b : AvailableBackends()) {
    TempDir dir;
    GenerateFixture(FixtureKind::kXzLike, dir / "fx");
    PipelineSpec base = LoadSpecFile(dir / "fx" / kFixtureSpecFile);
    PipelineSpec wider = base;
    wider.phases[0].permissions.deny.push_back(PathRule::Make("tests/files/"));
    ViolationReport report =
        CheckRun(wider, RunPipeline(wider, dir / "fx", WithBackend(b)));
    std::size_t configure = report.CountsFor("configure").total();
    std::size_t compile = report.CountsFor("compile").total();
    std::string name(ToString(b));
    v.Expect(configure >= 1, name + ": no configure violations");
    v.Expect(compile == 2, name + ": compile count changed to " + std::to_string(compile));
    v.Note(name + " configure=" + std::to_string(configure));
  }
}

// C3: enforcement on configure+compile keeps the marker out of out/app.
void CriterionPrevention(Verdict& v) {
  PrivilegeStatus priv = CheckPrivilege();
  if (priv.privileged) {
    v.Expect(false, "cannot enforce while privileged (" + priv.reason + ")");
    return;
  }
  TempDir dir;
  GenerateFixture(FixtureKind::kXzLike, dir / "plain");
  GenerateFixture(FixtureKind::kXzLike, dir / "guarded");
  PipelineSpec spec = ReferenceSpec(FixtureKind::kXzLike);
  spec.phases.resize(2);  // configure, compile
  for (PhaseSpec& p : spec.phases) p.permissions.deny = {PathRule::Make("tests/files/")};

  RunReport plain = RunPipeline(spec, dir / "plain", {});
  v.Expect(!plain.aborted_at, "unenforced build failed");
  v.Expect(testing::FileContains(dir / "plain/out/app", kPoisonMarker),
           "unenforced out/app lacks the marker");

  PhaseRunner runner(dir / "guarded", {}, spec.global_excludes);
  std::size_t denied = 0;
  for (const PhaseSpec& p : spec.phases) {
    EnforcementResult r = EnforcePhase(runner, p);
    denied += r.denied.size();
  }
  v.Expect(std::filesystem::exists(dir / "guarded/out/app"),
           "enforced build produced no out/app");
  v.Expect(!testing::FileContains(dir / "guarded/out/app", kPoisonMarker),
           "enforced out/app contains the marker");
  v.Note(std::to_string(denied) + " denied attempts");
}

// C4: scripted commands with known access sets.
struct Scripted {
  std::string command;
  std::set<std::pair<std::string, AccessMode>> expected;
};

std::vector<Scripted> ScriptedCommands() {
  using M = AccessMode;
  return {
      {"cat data/a.txt > /dev/null", {{"data/a.txt", M::kRead}}},
      {"cat data/a.txt data/b.txt > /dev/null; echo x >> data/c.txt",
       {{"data/a.txt", M::kRead}, {"data/b.txt", M::kRead}, {"data/c.txt", M::kWrite}}},
      {"echo fresh > out.txt", {{"out.txt", M::kCreate}}},
      {"rm data/e.txt", {{"data/e.txt", M::kDelete}}},
      {"cp data/a.txt copy.txt", {{"data/a.txt", M::kRead}, {"copy.txt", M::kCreate}}},
      {"mv data/d.txt moved.txt", {{"data/d.txt", M::kDelete}, {"moved.txt", M::kCreate}}},
      {"head -c 3 data/b.txt > /dev/null; printf z > data/a.txt",
       {{"data/b.txt", M::kRead}, {"data/a.txt", M::kWrite}}},
      {"mkdir -p gen && sort data/b.txt > gen/sorted.txt",
       {{"data/b.txt", M::kRead}, {"gen", M::kCreate}, {"gen/sorted.txt", M::kCreate}}},
      {"true", {}},
  };
}

void Seed(const TempDir& dir) {
  for (const char* f : {"a", "b", "c", "d", "e"}) {
    WriteFile(dir / (std::string("data/") + f + ".txt"), std::string("seed ") + f + "\n");
  }
}

bool IsModify(AccessMode m) {
  return m == AccessMode::kWrite || m == AccessMode::kCreate || m == AccessMode::kDelete;
}

using AccessSet = std::set<std::pair<std::string, AccessMode>>;

AccessSet InternalSet(const PhaseObservation& obs, bool reads, bool modifies) {
  AccessSet out;
  for (const AccessRecord& a : obs.file_accesses) {
    if (a.external) continue;
    if ((reads && a.mode == AccessMode::kRead) || (modifies && IsModify(a.mode))) {
      out.emplace(a.path, a.mode);
    }
  }
  return out;
}

void CriterionBackendOracle(Verdict& v) {
  bool trace = ProbeTracing().available;
  if (!trace) v.Note("trace backend unavailable: " + ProbeTracing().reason);
  int idx = 0;
  for (const Scripted& s : ScriptedCommands()) {
    std::string tag = "cmd" + std::to_string(idx++);
    PhaseSpec phase;
    phase.name = "p";
    phase.command = s.command;

    TempDir snap_dir;
    Seed(snap_dir);
    PhaseRunner snap_runner(snap_dir.path(), WithBackend(Backend::kSnapshot), {});
    if (!snap_runner.atime_probe().reliable) {
      v.Expect(false, "filesystem access times unreliable: " +
                          snap_runner.atime_probe().reason);
      return;
    }
    PhaseObservation snap = snap_runner.RunPhase(phase);
    v.Expect(snap.result.exit_code == 0, tag + " failed under snapshot");
    AccessSet snap_all = InternalSet(snap, true, true);
    for (const auto& want : s.expected) {
      v.Expect(snap_all.contains(want), tag + " snapshot missed " + want.first);
    }
    for (const auto& got : InternalSet(snap, false, true)) {
      v.Expect(s.expected.contains(got), tag + " snapshot spurious write " + got.first);
    }
    if (!trace) continue;

    TempDir trace_dir;
    Seed(trace_dir);
    PhaseRunner trace_runner(trace_dir.path(), WithBackend(Backend::kTrace), {});
    PhaseObservation traced = trace_runner.RunPhase(phase);
    v.Expect(traced.result.exit_code == 0, tag + " failed under trace");
    AccessSet trace_all = InternalSet(traced, true, true);
    for (const auto& got : snap_all) {
      v.Expect(trace_all.contains(got), tag + " trace lacks " + got.first);
    }
    v.Expect(InternalSet(traced, false, true) == InternalSet(snap, false, true),
             tag + " write sets differ between backends");
    for (const std::string& w : traced.result.warnings) {
      v.Expect(w.find("missed") == std::string::npos, tag + " trace: " + w);
    }
  }
  v.Note(std::to_string(idx) + " scripted commands");
}

// C5: checker properties over random observations and specs.
struct RandomWorld {
  std::mt19937_64 rng;
  std::vector<std::string> paths = {
      "src/main.c", "src/util.c", "src/lib/x.c", "tests/run.sh",
      "tests/files/a.xz", "tests/files/b.lzma", "tests/files/deep/c.bin",
      "out/app", "Makefile", "configure", "docs/readme.md", "build.sh"};
  std::vector<std::string> patterns = {
      "src/", "src/**", "src/*.c", "tests/", "tests/files/", "**/*.xz", "out/**",
      "*", "**", "docs/readme.md", "tests/files/*", "build.sh", "nothing/"};
  std::vector<std::string> vars = {"PW_TOKEN", "PW_OTHER", "LD_PRELOAD", "HOME",
                                   "AWS_KEY", "CFLAGS"};
  std::vector<std::string> var_globs = {"PW_*", "LD_*", "*", "HOME", "AWS_*"};
  std::vector<std::string> programs = {"make", "cc", "curl", "sh", "base64", "wget"};

  std::size_t Pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
  bool Coin() { return Pick(2) == 0; }

  ModeSet Modes() {
    static const RuleMode all[] = {RuleMode::kRead, RuleMode::kWrite,
                                   RuleMode::kCreate, RuleMode::kDelete, RuleMode::kAny};
    ModeSet m = ModeSet::Of({all[Pick(5)]});
    while (Coin()) m = m.With(all[Pick(5)]);
    return m;
  }

  PathRule Rule() {
    PathRule r = PathRule::Make(patterns[Pick(patterns.size())], Modes());
    if (Pick(5) == 0) r.severity = Severity::kWarn;
    return r;
  }

  PhaseObservation Observation(const std::string& phase) {
    static const AccessMode modes[] = {AccessMode::kRead, AccessMode::kWrite,
                                       AccessMode::kCreate, AccessMode::kDelete,
                                       AccessMode::kTouch};
    PhaseObservation obs;
    obs.result.phase_name = phase;
    std::size_t n = Pick(10);
    for (std::size_t i = 0; i < n; ++i) {
      AccessRecord a;
      a.phase_name = phase;
      a.path = paths[Pick(paths.size())];
      a.mode = modes[Pick(5)];
      a.evidence = Evidence::kTrace;
      obs.file_accesses.push_back(a);
    }
    obs.env_delta = EnvDelta{};
    for (std::size_t i = Pick(3); i > 0; --i) {
      const std::string& var = vars[Pick(vars.size())];
      switch (Pick(3)) {
        case 0: obs.env_delta->added[var] = "v"; break;
        case 1: obs.env_delta->removed[var] = "v"; break;
        default: obs.env_delta->changed[var] = {"a", "b"}; break;
      }
    }
    obs.exec_records = std::vector<ExecRecord>{};
    for (std::size_t i = Pick(4); i > 0; --i) {
      const std::string& p = programs[Pick(programs.size())];
      obs.exec_records->push_back({p, {p}, "/", 0});
      if (Coin()) obs.env_reads.push_back({vars[Pick(vars.size())], p});
    }
    return obs;
  }

  void AddRandomPolicy(PhaseSpec& p) {
    switch (Pick(5)) {
      case 0: p.env_policy.deny_read.push_back(var_globs[Pick(var_globs.size())]); break;
      case 1: p.env_policy.deny_modify.push_back(var_globs[Pick(var_globs.size())]); break;
      case 2: p.exec_policy.denied_programs.push_back(programs[Pick(programs.size())]); break;
      default: p.permissions.deny.push_back(Rule()); break;
    }
  }
};

std::set<std::tuple<std::string, SubjectKind, AccessMode>> Subjects(
    const std::vector<Violation>& vs) {
  std::set<std::tuple<std::string, SubjectKind, AccessMode>> out;
  for (const Violation& v : vs) out.emplace(v.subject, v.subject_kind, v.mode);
  return out;
}

void CriterionCheckerProperties(Verdict& v) {
  RandomWorld world{std::mt19937_64(20261016)};
  std::size_t failures = 0, emitted = 0;
  for (int i = 0; i < 1000; ++i) {
    PhaseSpec phase;
    phase.name = "p";
    phase.command = "true";
    PhaseObservation obs = world.Observation("p");
    bool fail = !CheckPhase(phase, obs).empty();  // empty deny

    for (std::size_t k = world.Pick(4); k > 0; --k) world.AddRandomPolicy(phase);
    std::vector<Violation> base = CheckPhase(phase, obs);
    PhaseSpec more = phase;
    world.AddRandomPolicy(more);
    std::vector<Violation> grown = CheckPhase(more, obs);
    auto b = Subjects(base), g = Subjects(grown);
    fail |= !std::includes(g.begin(), g.end(), b.begin(), b.end());
    for (const auto* set : {&base, &grown}) {
      for (const Violation& x : *set) {
        ++emitted;
        fail |= !RuleStillMatches(x);
      }
    }
    failures += fail;
  }
  v.Expect(failures == 0, std::to_string(failures) + " of 1000 random cases failed");
  v.Note(std::to_string(emitted) + " violations re-matched");

  // Empty deny over real corpus observations.
  TempDir dir;
  for (FixtureKind kind : AllFixtureKinds()) {
    std::filesystem::path fx = dir / std::string(ToString(kind));
    GroundTruth truth = GenerateFixture(kind, fx);
    PipelineSpec spec = ReferenceSpec(kind);
    for (PhaseSpec& p : spec.phases) {
      p.permissions = {};
      p.env_policy = {};
      p.exec_policy = {};
    }
    ViolationReport r = CheckRun(
        spec, RunPipeline(spec, fx, WithBackend(Backend::kAuto, truth.preset_env)));
    v.Expect(r.empty(), std::string(ToString(kind)) + ": empty spec reported violations");
  }
}

// C6: apply then restore on a random 200-file tree.
std::map<std::string, mode_t> Survey(const std::filesystem::path& root) {
  std::map<std::string, mode_t> out;
  for (auto it = std::filesystem::recursive_directory_iterator(root);
       it != std::filesystem::recursive_directory_iterator(); ++it) {
    struct stat st {};
    ::lstat(it->path().c_str(), &st);
    out[std::filesystem::relative(it->path(), root).string()] = st.st_mode & 07777;
  }
  return out;
}

void CriterionMaskInverse(Verdict& v) {
  if (CheckPrivilege().privileged) {
    v.Expect(false, "cannot mask while privileged (" + CheckPrivilege().reason + ")");
    return;
  }
  std::mt19937_64 rng(6);
  auto pick = [&](std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  };
  const mode_t file_modes[] = {0644, 0600, 0640, 0755, 0700, 0444, 0664, 0604};
  const mode_t dir_modes[] = {0755, 0700, 0750, 0775, 0711};
  const char* names[] = {"alpha", "beta", "gamma", "delta", "eps"};

  for (int round = 0; round < 5; ++round) {
    TempDir dir;
    std::vector<std::string> dirs = {""};
    std::vector<std::string> files;
    while (files.size() < 200) {
      if (pick(6) == 0) {
        std::string d = dirs[pick(dirs.size())] + names[pick(5)] +
                        std::to_string(dirs.size()) + "/";
        std::filesystem::create_directories(dir / d);
        dirs.push_back(d);
      } else {
        std::string f = dirs[pick(dirs.size())] + "f" + std::to_string(files.size());
        WriteFile(dir / f, std::string(pick(64), 'x'));
        files.push_back(f);
      }
    }
    for (const std::string& f : files) {
      ::chmod((dir / f).c_str(), file_modes[pick(8)]);
    }
    for (std::size_t i = 1; i < dirs.size(); ++i) {
      ::chmod((dir / dirs[i]).c_str(), dir_modes[pick(5)]);
    }
    std::vector<PathRule> deny;
    for (int k = 0; k < 3; ++k) {
      std::string target = pick(2) ? dirs[1 + pick(dirs.size() - 1)] : files[pick(files.size())];
      deny.push_back(PathRule::Make(
          target, pick(2) ? ModeSet::Any() : ModeSet::Of({RuleMode::kWrite})));
    }
    auto before = Survey(dir.path());
    MaskState state = ApplyMask(dir.path(), deny, "p");
    // Entries under a fully masked directory cannot be stat'ed; check the rest.
    std::size_t reachable = 0;
    bool changed = true;
    for (const MaskEntry& e : state.entries) {
      struct stat st {};
      if (::lstat(e.abs_path.c_str(), &st) != 0) continue;
      ++reachable;
      changed &= (st.st_mode & 07777) == e.masked;
    }
    changed &= reachable > 0;
    std::vector<std::string> warnings = RestoreMask(state);
    v.Expect(changed, "masked bits not in place");
    v.Expect(warnings.empty(), "unexpected restore warnings");
    v.Expect(Survey(dir.path()) == before,
             "round " + std::to_string(round) + ": bits differ after restore");
  }

  // A phase deletes a masked file: warning for it, everything else restored.
  TempDir dir;
  for (int i = 0; i < 200; ++i) {
    WriteFile(dir / ("d" + std::to_string(i % 10) + "/f" + std::to_string(i)), "x");
  }
  auto before = Survey(dir.path());
  std::vector<PathRule> deny = {PathRule::Make("d3/f13"), PathRule::Make("d4/"),
                                PathRule::Make("d5/", ModeSet::Of({RuleMode::kRead}))};
  MaskState state = ApplyMask(dir.path(), deny, "p");
  std::filesystem::remove(dir / "d3/f13");
  std::vector<std::string> warnings = RestoreMask(state);
  before.erase("d3/f13");
  v.Expect(warnings.size() == 1 && warnings[0].find("d3/f13") != std::string::npos,
           "expected one warning about the deleted file");
  v.Expect(Survey(dir.path()) == before, "bits differ after restore with deletion");
}

// C7: inference on the standard layout, then end-to-end recall on xz_like.
void CriterionInference(Verdict& v) {
  TempDir dir;
  GenerateFixture(FixtureKind::kSafe, dir / "standard");
  InferenceOutcome out = InferSpec(dir / "standard");
  std::vector<std::string> names;
  for (const PhaseSpec& p : out.draft.phases) names.push_back(p.name);
  v.Expect(names == std::vector<std::string>{"configure", "compile", "test"},
           "phases inferred differ from configure/compile/test");
  bool h1 = false;
  if (const PhaseSpec* c = out.draft.FindPhase("compile")) {
    for (const PathRule& r : c->permissions.deny) {
      h1 |= r.origin == "H1" && r.enabled && r.pattern() == "tests/" && r.modes.IsAny();
    }
  }
  v.Expect(h1, "compile phase lacks the H1 deny-tests rule");

  GenerateFixture(FixtureKind::kXzLike, dir / "corpus/xz_like");
  BenchResult r = EvaluateChecker(ListCorpus(dir / "corpus"), SpecStrategy::kInferred);
  v.Expect(r.fixtures.size() == 1 && r.fixtures[0].built, "xz_like did not build");
  v.Expect(r.metrics.recall == 1.0 && !r.metrics.recall_by_convention,
           "recall " + std::to_string(r.metrics.recall));
  v.Note("inferred TP=" + std::to_string(r.metrics.true_positives) +
         " FP=" + std::to_string(r.metrics.false_positives));
}

// C8: full four-kind benchmark.
void CriterionBenchmark(Verdict& v) {
  TempDir dir;
  for (FixtureKind kind : AllFixtureKinds()) {
    GenerateFixture(kind, dir / "corpus" / std::string(ToString(kind)));
  }
  auto t0 = Clock::now();
  BenchResult r = EvaluateChecker(ListCorpus(dir / "corpus"), SpecStrategy::kReference);
  double secs = Since(t0);
  std::size_t built = 0;
  for (const FixtureEvaluation& f : r.fixtures) built += f.built;
  v.Expect(built == 4, std::to_string(built) + " of 4 fixtures built");
  v.Expect(r.metrics.precision == 1.0 && r.metrics.recall == 1.0,
           "precision " + std::to_string(r.metrics.precision) + " recall " +
               std::to_string(r.metrics.recall));
  v.Expect(secs < 60.0, "took " + std::to_string(secs) + " s");
  v.Note("TP=" + std::to_string(r.metrics.true_positives) + " in " +
         std::to_string(secs).substr(0, 5) + " s");
}

// C9: snapshot and diff timings on 10k files.
void CriterionPerformance(Verdict& v) {
  TempDir dir;
  for (int d = 0; d < 100; ++d) {
    std::filesystem::path sub = dir / ("d" + std::to_string(d));
    std::filesystem::create_directories(sub);
    for (int f = 0; f < 100; ++f) {
      WriteFile(sub / ("f" + std::to_string(f)), "payload");
    }
  }
  auto t0 = Clock::now();
  FsSnapshot a = TakeSnapshot(dir.path(), {});
  double snap = Since(t0);
  FsSnapshot b = TakeSnapshot(dir.path(), {});
  auto t1 = Clock::now();
  std::vector<AccessRecord> diff = DiffSnapshots(a, b, "p");
  double dsecs = Since(t1);
  std::size_t files = 0;
  for (const auto& [rel, rec] : a.records) files += rec.kind == EntryKind::kRegular;
  v.Expect(files == 10000, std::to_string(files) + " files recorded");
  v.Expect(snap < 5.0, "snapshot took " + std::to_string(snap) + " s");
  v.Expect(dsecs < 1.0, "diff took " + std::to_string(dsecs) + " s");
  v.Expect(diff.empty(), "diff of unchanged tree is not empty");
  v.Note("snapshot " + std::to_string(snap).substr(0, 5) + " s, diff " +
         std::to_string(dsecs).substr(0, 5) + " s");
}

}  // namespace
}  // namespace phase_warden

int main() {
  using phase_warden::Verdict;
  struct Criterion {
    const char* id;
    const char* title;
    std::function<void(Verdict&)> run;
  };
  const Criterion criteria[] = {
      {"C1", "xz case study: two compile violations", phase_warden::CriterionXzReproduction},
      {"C2", "configure deny adds configure findings", phase_warden::CriterionConfigureFalseAlarms},
      {"C3", "enforcement keeps poison out of out/app", phase_warden::CriterionPrevention},
      {"C4", "backend oracle equivalence", phase_warden::CriterionBackendOracle},
      {"C5", "checker properties", phase_warden::CriterionCheckerProperties},
      {"C6", "mask apply/restore inverse", phase_warden::CriterionMaskInverse},
      {"C7", "inference layout and recall", phase_warden::CriterionInference},
      {"C8", "benchmark precision and recall", phase_warden::CriterionBenchmark},
      {"C9", "snapshot and diff performance", phase_warden::CriterionPerformance},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Verdict v;
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.Expect(false, std::string("exception: ") + e.what());
    }
    failed += !v.ok();
    std::cout << "[ACCEPT] " << c.id << " " << c.title << " ... "
              << (v.ok() ? "PASS" : "FAIL") << " (" << v.Summary() << ")"
              << std::endl;
  }
  std::cout << "[ACCEPT] " << (9 - failed) << "/9 criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}

// Copyright 2026 The apifuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Acceptance run: one PASS/FAIL line per criterion. Exits non-zero when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "apifuzz/campaign.h"
#include "apifuzz/cli.h"
#include "apifuzz/constraints.h"
#include "apifuzz/dsl.h"
#include "apifuzz/generator.h"
#include "apifuzz/synthetic_targets.h"

namespace apifuzz {
namespace {

namespace fs = std::filesystem;

struct Verdict {
  bool pass = true;
  std::string detail;
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

fs::path WorkDir(const std::string& name) {
  fs::path dir = fs::path(APIFUZZ_ACCEPTANCE_DIR) / name;
  fs::remove_all(dir);
  return dir;
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string ManifestPath(const std::string& fixture) {
  return absl::StrCat(APIFUZZ_FIXTURE_DIR, "/", fixture, "/manifest.json");
}

absl::StatusOr<Program> Parse(const std::string& text, const Manifest& m) {
  auto p = ParseProgram(text, m.types());
  if (!p.ok()) return p.status();
  p->Normalize();
  auto diags = ValidateProgram(*p, m);
  if (!diags.empty()) return absl::InvalidArgumentError(FormatDiagnostics(diags));
  return p;
}

CampaignConfig Config(const std::string& manifest, const fs::path& out, uint64_t execs, uint64_t seed) {
  CampaignConfig cfg;
  cfg.manifest_path = manifest;
  cfg.out_dir = out.string();
  cfg.execs = execs;
  cfg.seed = seed;
  return cfg;
}

std::vector<Fixture> Fixtures() {
  auto all = LoadAllFixtures(APIFUZZ_FIXTURE_DIR);
  if (!all.ok()) {
    std::fprintf(stderr, "cannot load fixtures: %s\n", std::string(all.status().message()).c_str());
    std::exit(2);
  }
  return *std::move(all);
}

// Learned constraints on the single-constraint fixtures against their
// ground truth.
Verdict ConstraintLearning(const std::vector<Fixture>& fixtures) {
  Verdict v;
  size_t learned = 0, correct = 0, truth = 0, found = 0, count = 0;
  double slowest = 0;
  for (const auto& fx : fixtures) {
    if (!fx.single_constraint) continue;
    ++count;
    auto start = std::chrono::steady_clock::now();
    auto c = Campaign::Open(Config(ManifestPath(fx.name), WorkDir("learn-" + fx.name), 200000, 1));
    if (!c.ok() || !(*c)->Run().ok()) {
      v.pass = false;
      absl::StrAppend(&v.detail, fx.name, " campaign failed; ");
      continue;
    }
    double secs = Seconds(start);
    slowest = std::max(slowest, secs);
    if (secs >= 300) {
      v.pass = false;
      absl::StrAppend(&v.detail, fx.name, " took ", secs, "s; ");
    }
    const auto& active = (*c)->store().active();
    learned += active.size();
    truth += fx.ground_truth.size();
    for (const auto& a : active) {
      bool hit = std::any_of(fx.ground_truth.begin(), fx.ground_truth.end(),
                             [&](const Constraint& g) { return g.SameAs(a); });
      correct += hit;
      if (!hit) absl::StrAppend(&v.detail, fx.name, " extra ", DescribeConstraint(a), "; ");
    }
    for (const auto& g : fx.ground_truth) {
      bool hit = std::any_of(active.begin(), active.end(), [&](const Constraint& a) { return g.SameAs(a); });
      found += hit;
      if (!hit) absl::StrAppend(&v.detail, fx.name, " missed ", DescribeConstraint(g), "; ");
    }
  }
  double precision = learned == 0 ? 1.0 : static_cast<double>(correct) / learned;
  double recall = truth == 0 ? 1.0 : static_cast<double>(found) / truth;
  v.pass = v.pass && count == 6 && precision == 1.0 && recall == 1.0;
  v.detail = absl::StrFormat("%d fixtures, precision %.2f%%, recall %.2f%%, slowest %.1fs. %s", count,
                             100 * precision, 100 * recall, slowest, v.detail);
  return v;
}

struct TriageCase {
  std::string label;
  Executor* exec;
  std::string program;
};

// Probe rows of crash inference against direct re-execution.
Verdict TriageOracle(const std::vector<Fixture>& fixtures) {
  Verdict v;
  std::vector<std::unique_ptr<Executor>> owned;
  std::vector<TriageCase> cases;
  auto synthetic = [&](const Fixture& fx) {
    auto e = MakeSyntheticExecutor(fx.manifest, *fx.library, ExecConfig{});
    owned.push_back(*std::move(e));
    return owned.back().get();
  };
  for (const auto& fx : fixtures) {
    for (const auto& bug : fx.bugs) {
      if (bug.fault == FaultKind::kCanaryHit) cases.push_back({fx.name + "/" + bug.function, synthetic(fx), bug.program});
    }
    if (fx.name == "arraylib") {
      Executor* e = synthetic(fx);
      for (int len : {5, 6, 9}) {
        cases.push_back({absl::StrCat("arraylib/sum len ", len), e,
                         absl::StrCat("<0> load Vec<char> = vec(4)[1, 2, 3, 0]\n<1> load char* = &<0>\n"
                                      "<2> load int = ", len, "\n<3> call target: sum ? (<1>, <2>)\n")});
      }
    }
    if (fx.name == "indexlib") {
      Executor* e = synthetic(fx);
      for (int idx : {4, 5, 12}) {
        cases.push_back({absl::StrCat("indexlib/at idx ", idx), e,
                         absl::StrCat("<0> load Vec<char> = vec(4)[1, 2, 3, 0]\n<1> load char* = &<0>\n"
                                      "<2> load int = ", idx, "\n<3> call target: at ? (<1>, <2>)\n")});
      }
    }
  }
  static Manifest demo_manifest;
  if (auto dm = LoadManifest(APIFUZZ_FFI_DEMO_MANIFEST); dm.ok()) {
    demo_manifest = *std::move(dm);
    auto e = MakeFfiExecutor(demo_manifest, APIFUZZ_FFI_DEMO_LIB, ExecConfig{});
    if (e.ok()) {
      owned.push_back(*std::move(e));
      cases.push_back({"ffi-demo/demo_sum len N+1", owned.back().get(),
                       "<0> load Vec<char> = vec(8)[1, 2, 3, 4, 5, 6, 7, 0]\n<1> load char* = &<0>\n"
                       "<2> load int = 9\n<3> call target: demo_sum ? (<1>, <2>)\n"});
    }
  }
  size_t rows = 0, decisions = 0;
  for (const auto& tc : cases) {
    const Manifest& m = tc.exec->manifest();
    auto p = Parse(tc.program, m);
    if (!p.ok()) {
      v.pass = false;
      absl::StrAppend(&v.detail, tc.label, ": ", p.status().message(), "; ");
      continue;
    }
    FeedbackReport r = tc.exec->Execute(*p);
    if (!r.fault || r.fault->kind != FaultKind::kCanaryHit) {
      v.pass = false;
      absl::StrAppend(&v.detail, tc.label, ": trigger does not hit a canary; ");
      continue;
    }
    ConstraintStore store;
    Rng rng(5);
    CrashVerdict cv = InferFromCrash(*p, r, *tc.exec, store, rng, 1);
    size_t call_pos = *p->PositionOf(r.fault->stmt);
    std::optional<Constraint> expected;
    for (const auto& row : cv.probes) {
      ++rows;
      auto slot = ResolveSlot(*p, call_pos, row.slot, m);
      if (!slot) {
        v.pass = false;
        continue;
      }
      std::array<bool, 3> direct{};
      for (int k = 0; k < 3; ++k) {
        Program q = *p;
        Value* val = MutableValueAt(q[slot->pos].load().value, m.types(), slot->path);
        val->payload = Number{static_cast<uint64_t>(static_cast<int64_t>(row.n) - 1 + k)};
        direct[k] = tc.exec->Execute(q).IsCrash();
      }
      if (direct != row.crashed) {
        v.pass = false;
        absl::StrAppend(&v.detail, tc.label, ": probe row differs from direct runs; ");
      }
      if (expected || direct[0]) continue;
      Constraint c;
      c.function = r.fault->function;
      c.locator = row.slot;
      c.peer = row.array;
      if (!direct[1] && direct[2]) {
        c.kind = ConstraintKind::kEqual;
        expected = c;
      } else if (direct[1] && direct[2]) {
        c.kind = ConstraintKind::kRange;
        c.min = 0;
        expected = c;
      }
    }
    std::vector<Constraint> numeric;
    for (const auto& c : cv.learned) {
      if (c.kind == ConstraintKind::kEqual || c.kind == ConstraintKind::kRange) numeric.push_back(c);
    }
    bool ok = expected ? numeric.size() == 1 && numeric[0].SameAs(*expected) : numeric.empty();
    decisions += expected.has_value();
    if (!ok) {
      v.pass = false;
      absl::StrAppend(&v.detail, tc.label, ": decision does not follow the table; ");
    }
  }
  v.pass = v.pass && rows > 0;
  v.detail = absl::StrFormat("%d crashes, %d probe rows re-run directly, %d EQUAL/RANGE decisions. %s",
                             cases.size(), rows, decisions, v.detail);
  return v;
}

// The setter-gated bug of pcap-like, and the deletion test on the program
// that reached it.
Verdict InterApiDiscovery(const Fixture& fx) {
  Verdict v;
  auto c = Campaign::Open(Config(ManifestPath(fx.name), WorkDir("pcap"), 500000, 1));
  if (!c.ok() || !(*c)->Run().ok()) return {false, "campaign failed"};
  const Manifest& m = (*c)->manifest();
  const SeededBug& bug = fx.bugs.front();
  const CrashRecord* hit = nullptr;
  for (const auto& [key, rec] : (*c)->crashes()) {
    if (key.function == bug.function && rec.report.fault && rec.report.fault->kind == bug.fault) hit = &rec;
  }
  if (hit == nullptr) return {false, absl::StrCat("bug in ", bug.function, " not reached in 500000 execs")};

  // Add a neutral call before the target, then delete calls one by one.
  Program p = hit->program;
  size_t target = *p.TargetPosition();
  StmtIndex handle = p[target].call().args[0];
  Program q = p;
  q.mutable_statements().resize(target);
  StmtIndex level = q.Append(LoadStmt{*m.types().Lookup("int"), Value{*m.types().Lookup("int"), Number{3}}});
  q.Append(CallStmt{"pc_log", CallRole::kRelative, false, {handle, level}});
  size_t added = q.size() - target;
  for (size_t i = target; i < p.size(); ++i) {
    Statement s = p[i];
    s.index += static_cast<StmtIndex>(added);
    RemapReferences(s, [&](StmtIndex x) { return x >= target ? x + static_cast<StmtIndex>(added) : x; });
    q.mutable_statements().push_back(std::move(s));
  }
  if (!ValidateProgram(q, m).empty()) return {false, "could not insert the neutral call"};
  size_t qt = *q.TargetPosition();
  std::vector<size_t> inserted;
  for (size_t i = 0; i < qt; ++i) {
    if (q[i].is_call() && q[i].call().name != "pc_create") inserted.push_back(i);
  }
  FeedbackReport base = (*c)->executor().Execute(q);
  EffectiveResult eff = LearnEffectiveRelation(q, inserted, base.CoverageKeys(), (*c)->executor(), 1);
  std::set<std::string> kept, want;
  for (const auto& e : eff.kept) kept.insert(e.from);
  for (const auto& [from, to] : fx.effective_relations) want.insert(from);
  bool log_dropped = std::count(eff.dropped.begin(), eff.dropped.end(), "pc_log") > 0;
  v.pass = kept == want && eff.kept.size() == want.size() && log_dropped;
  std::vector<std::string> learned;
  for (const auto& e : (*c)->relations().effective_edges) learned.push_back(e.from + "->" + e.to);
  v.detail = absl::StrFormat("bug reached (crash %d); deletion test kept {%s}, dropped {%s}; campaign edges {%s}",
                             hit->id, absl::StrJoin(kept, ", "), absl::StrJoin(eff.dropped, ", "),
                             absl::StrJoin(learned, ", "));
  return v;
}

// Every stored crash still crashes once stored constraints are applied.
Verdict SpuriousFiltering(const std::vector<Fixture>& fixtures) {
  Verdict v;
  size_t crashes = 0, spurious = 0;
  uint64_t execs = 0;
  for (const auto& fx : fixtures) {
    fs::path dir = WorkDir("spurious-" + fx.name);
    auto c = Campaign::Open(Config(ManifestPath(fx.name), dir, 1000000, 11));
    if (!c.ok()) return {false, absl::StrCat(fx.name, ": ", c.status().message())};
    auto s = (*c)->Run();
    if (!s.ok()) return {false, absl::StrCat(fx.name, ": ", s.status().message())};
    execs += s->execs;
    spurious += s->spurious_filtered;
    c->reset();
    auto store = ConstraintStore::FromJsonLines(Slurp(dir / "constraints.jsonl"));
    auto exec = MakeSyntheticExecutor(fx.manifest, *fx.library, ExecConfig{});
    if (!store.ok() || !exec.ok()) return {false, "cannot audit " + fx.name};
    Generator gen(fx.manifest);
    Rng rng(99);
    auto stored = ListCrashes(dir.string());
    for (const auto& sc : *stored) {
      ++crashes;
      auto p = Parse(sc.program_text, fx.manifest);
      if (!p.ok()) {
        v.pass = false;
        absl::StrAppend(&v.detail, fx.name, "/", sc.stem, " does not parse; ");
        continue;
      }
      bool original = (*exec)->Execute(*p).IsCrash();
      auto refined = Refine(*p, *store, fx.manifest, rng, &gen);
      bool after = refined.ok() ? (*exec)->Execute(*refined).IsCrash() : original;
      if (!original || !after) {
        v.pass = false;
        absl::StrAppend(&v.detail, fx.name, "/", sc.stem, original ? " only crashes by violating constraints; " : " does not reproduce; ");
      }
    }
  }
  v.detail = absl::StrFormat("%d fixtures, %d execs, %d crash files audited, %d spurious crashes filtered. %s",
                             fixtures.size(), execs, crashes, spurious, v.detail);
  return v;
}

std::string Canonical(std::string line) {
  std::string out;
  for (char ch : line) {
    if (ch == ' ' && !out.empty() && out.back() == ' ') continue;
    out += ch;
  }
  size_t eq = out.find("= ");
  if (eq != std::string::npos && eq > 0 && out[eq - 1] != ' ') out.insert(eq, " ");
  return out;
}

Verdict DslRoundTrip(const std::vector<Fixture>& fixtures) {
  Verdict v;
  size_t n = 0, bad = 0;
  uint64_t seed = 0;
  while (n < 10000) {
    for (const auto& fx : fixtures) {
      Generator gen(fx.manifest);
      Rng rng(seed++);
      SeedPool pool;
      for (const auto& sig : fx.manifest.functions()) {
        auto p = gen.PilotRound(sig, rng);
        if (p.ok()) pool.Add(SeedEntry{pool.size(), *p});
      }
      for (int i = 0; i < 50 && !pool.empty(); ++i) {
        auto c = gen.EvolveRound(pool, nullptr, rng);
        if (!c.ok()) continue;
        if (i % 5 == 0) pool.Add(SeedEntry{pool.size(), c->program});
        ++n;
        std::string text = SerializeProgram(c->program, fx.manifest.types());
        auto back = ParseProgram(text, fx.manifest.types());
        if (!back.ok() || !(*back == c->program) || SerializeProgram(*back, fx.manifest.types()) != text) ++bad;
      }
    }
  }
  const Fixture* cjson = nullptr;
  for (const auto& fx : fixtures) {
    if (fx.name == "cjson") cjson = &fx;
  }
  const char* figure =
      "<0>  load Vec<char>= vec(32)[\"GXsAAAAAAAAAo9tsrXXoqw57jwAAAAAAAAARNk+1AAA=\"]\n"
      "<1>  load char* = &<0>\n"
      "<2>  load char** = null\n"
      "<3>  load int = 0\n"
      "<4>  call cJSON_ParseWithOpts (<1>, <2>, <3>)\n"
      "<5>  assert non_null(<4>)\n"
      "<6>  load cJSON = { next: null, prev:  null, child: null, type_: 8, valuestring: null, valueint: 12345, "
      "valuedouble: 0.2771, string: null }\n"
      "<7>  update <4>[0.child] = <6>\n"
      "<8>  load Vec<char> = vec(7)[54, 52, -68, -43, 1, 122, 0]\n"
      "<9>  load char* = &<8>\n"
      "<10> call cJSON_AddFalseToObject (<4>, <9>)\n"
      "<11> load int = 1\n"
      "<12> load int = 0\n"
      "<13> call cJSON_PrintBuffered ? (<4>, <11>, <12>)\n";
  bool figure_ok = false;
  std::string why;
  auto p = ParseProgram(figure, cjson->manifest.types());
  if (!p.ok()) {
    why = std::string(p.status().message());
  } else if (auto d = ValidateProgram(*p, cjson->manifest); !d.empty()) {
    why = FormatDiagnostics(d);
  } else {
    std::string text = SerializeProgram(*p, cjson->manifest.types());
    std::string expected;
    std::istringstream in(figure);
    for (std::string line; std::getline(in, line);) expected += Canonical(line) + "\n";
    figure_ok = text == expected && SerializeProgram(*ParseProgram(text, cjson->manifest.types()),
                                                     cjson->manifest.types()) == text;
    if (!figure_ok) why = "serialized form is not canonical:\n" + text;
  }
  v.pass = bad == 0 && figure_ok;
  v.detail = absl::StrFormat("%d generated programs, %d mismatches; example program %s", n, bad,
                             figure_ok ? "parses, validates and re-serializes canonically" : why);
  return v;
}

// New seeds from small fresh campaigns, minimized and checked by the
// exhaustive single-removal oracle.
Verdict Minimization(const std::vector<Fixture>& fixtures) {
  Verdict v;
  size_t seeds = 0, small = 0, removable = 0, changed = 0;
  uint64_t trial = 0;
  while (seeds < 1000) {
    for (const auto& fx : fixtures) {
      if (seeds >= 1000) break;
      auto exec = MakeSyntheticExecutor(fx.manifest, *fx.library, ExecConfig{});
      Generator gen(fx.manifest);
      Rng rng(1000 + trial);
      std::set<uint32_t> seen;
      SeedPool pool;
      auto consider = [&](const Program& p) {
        FeedbackReport r = (*exec)->Execute(p);
        if (!r.NormalExit()) return;
        std::vector<uint32_t> keys = r.CoverageKeys();
        if (std::all_of(keys.begin(), keys.end(), [&](uint32_t k) { return seen.count(k) > 0; })) return;
        seen.insert(keys.begin(), keys.end());
        ++seeds;
        Program min = MinimizeNewSeed(p, keys, **exec);
        FeedbackReport after = (*exec)->Execute(min);
        if (after.CoverageKeys() != keys || after.IsCrash()) ++changed;
        pool.Add(SeedEntry{pool.size(), min});
        if (min.size() > 15) return;
        ++small;
        size_t target = *min.TargetPosition();
        for (size_t pos = 0; pos < min.size(); ++pos) {
          auto deps = DependentsOf(min, pos);
          if (std::find(deps.begin(), deps.end(), target) != deps.end()) continue;
          Program q = min;
          q.ErasePositions(deps);
          q = MinimizeAfterMutation(q);
          FeedbackReport rr = (*exec)->Execute(q);
          if (!rr.IsCrash() && rr.CoverageKeys() == keys) ++removable;
        }
      };
      for (const auto& sig : fx.manifest.functions()) {
        auto p = gen.PilotRound(sig, rng);
        if (p.ok()) consider(*p);
      }
      for (int i = 0; i < 200 && !pool.empty() && seeds < 1000; ++i) {
        auto c = gen.EvolveRound(pool, nullptr, rng);
        pool.Tick();
        if (c.ok()) consider(c->program);
      }
    }
    ++trial;
  }
  v.pass = changed == 0 && removable == 0 && small > 0;
  v.detail = absl::StrFormat("%d new seeds, %d with changed coverage; %d of at most 15 statements, %d removable statements",
                             seeds, changed, small, removable);
  return v;
}

Verdict Determinism(const std::vector<Fixture>& fixtures) {
  Verdict v;
  size_t same = 0;
  for (const auto& fx : fixtures) {
    std::vector<std::string> summaries;
    for (int run = 0; run < 2; ++run) {
      fs::path dir = WorkDir(absl::StrCat("determinism-", fx.name, "-", run));
      std::ostringstream out, err;
      RunCli({"fuzz", "--manifest", ManifestPath(fx.name), "--out", dir.string(), "--execs", "50000", "--seed",
              "2024", "--backend", "synthetic"},
             out, err);
      summaries.push_back(Slurp(dir / "summary.json"));
    }
    if (!summaries[0].empty() && summaries[0] == summaries[1]) {
      ++same;
    } else {
      v.pass = false;
      absl::StrAppend(&v.detail, fx.name, " differs; ");
    }
  }
  v.detail = absl::StrFormat("%d of %d fixtures byte-identical across two runs. %s", same, fixtures.size(), v.detail);
  return v;
}

struct Snapshot {
  size_t seeds;
  std::set<uint32_t> coverage;
  std::string store;
  size_t crashes;
  bool operator==(const Snapshot&) const = default;
};

// Wall-clock time on the ffi backend differs between any two runs.
FeedbackReport Untimed(FeedbackReport r) {
  r.virtual_time = 0;
  return r;
}

Snapshot Take(const Campaign& c) {
  return {c.pool().size(), c.coverage(), c.store().ToJsonLines(), c.crashes().size()};
}

// 1000 crashing inputs in a row through a live campaign.
Verdict Isolation() {
  Verdict v;
  struct Setup {
    std::string label;
    CampaignConfig cfg;
    std::string good;
    std::string bad;
  };
  std::vector<Setup> setups;
  setups.push_back({"synthetic", Config(ManifestPath("nonnull"), WorkDir("isolation-synthetic"), 100000, 3),
                    "<0> load int = 7\n<1> load int* = &<0>\n<2> call target: peek ? (<1>)\n",
                    "<0> load int* = null\n<1> call target: peek ? (<0>)\n"});
  CampaignConfig ffi = Config(APIFUZZ_FFI_DEMO_MANIFEST, WorkDir("isolation-ffi"), 20000, 3);
  ffi.backend = BackendKind::kFfi;
  ffi.library_path = APIFUZZ_FFI_DEMO_LIB;
  setups.push_back({"ffi", ffi, "<0> load int = 7\n<1> load int* = &<0>\n<2> call target: demo_peek ? (<1>)\n",
                    "<0> load int* = null\n<1> call target: demo_peek ? (<0>)\n"});
  for (auto& s : setups) {
    auto c = Campaign::Open(s.cfg);
    if (!c.ok()) return {false, absl::StrCat(s.label, ": ", c.status().message())};
    const Manifest& m = (*c)->manifest();
    auto good = Parse(s.good, m);
    auto bad = Parse(s.bad, m);
    if (!good.ok() || !bad.ok()) return {false, s.label + ": bad test programs"};
    FeedbackReport reference = Untimed((*c)->executor().Execute(*good));
    (*c)->Process(*bad);
    Snapshot before = Take(**c);
    size_t crashed = 0;
    for (int i = 0; i < 1000; ++i) {
      if ((*c)->executor().Execute(*bad).IsCrash()) ++crashed;
      (*c)->Process(*bad);
    }
    bool same_state = Take(**c) == before;
    bool same_report = Untimed((*c)->executor().Execute(*good)) == reference;
    bool runs = (*c)->Run().ok();
    bool ok = crashed == 1000 && same_state && same_report && runs;
    v.pass = v.pass && ok;
    absl::StrAppend(&v.detail, s.label, ": ", crashed, " crashes, state ", same_state ? "intact" : "changed",
                    ", report ", same_report ? "identical" : "differs", ", campaign ",
                    runs ? "finished" : "failed", "; ");
  }
  return v;
}

int Main() {
  fs::create_directories(APIFUZZ_ACCEPTANCE_DIR);
  std::vector<Fixture> fixtures = Fixtures();
  const Fixture* pcap = nullptr;
  for (const auto& fx : fixtures) {
    if (fx.name == "pcap-like") pcap = &fx;
  }
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
  };
  std::vector<Criterion> criteria = {
      {"constraint-learning-soundness", [&] { return ConstraintLearning(fixtures); }},
      {"crash-triage-oracle-equivalence", [&] { return TriageOracle(fixtures); }},
      {"inter-api-discovery", [&] { return InterApiDiscovery(*pcap); }},
      {"spurious-filtering", [&] { return SpuriousFiltering(fixtures); }},
      {"dsl-round-trip", [&] { return DslRoundTrip(fixtures); }},
      {"minimization", [&] { return Minimization(fixtures); }},
      {"determinism", [&] { return Determinism(fixtures); }},
      {"isolation", [&] { return Isolation(); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Verdict v = c.run();
    failed += !v.pass;
    std::printf("%s %s (%.1fs): %s\n", v.pass ? "PASS" : "FAIL", c.name, Seconds(start), v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace apifuzz

int main() { return apifuzz::Main(); }

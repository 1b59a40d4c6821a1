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


#include <filesystem>
#include <string>
#include <vector>

#include "apifuzz/dsl.h"
#include "apifuzz/executor.h"
#include "apifuzz/hooks.h"
#include "apifuzz/synthetic_targets.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace apifuzz {
namespace {

namespace fs = std::filesystem;
using ::apifuzz::testing::FixtureExecutor;
using ::apifuzz::testing::FixtureManifest;
using ::apifuzz::testing::ParseOrDie;

constexpr char kCjsonNullParse[] = R"(<0>  load Vec<char>= vec(32)["GXsAAAAAAAAAo9tsrXXoqw57jwAAAAAAAAARNk+1AAA="]
<1>  load char* = &<0>
<2>  load char** = null
<3>  load int = 0
<4>  call cJSON_ParseWithOpts (<1>, <2>, <3>)
<5>  assert non_null(<4>)
<6>  load cJSON = { next: null, prev:  null, child: null, type_: 8, valuestring: null, valueint: 12345, valuedouble: 0.2771, string: null }
<7>  update <4>[0.child] = <6>
<8>  load Vec<char> = vec(7)[54, 52, -68, -43, 1, 122, 0]
<9>  load char* = &<8>
<10> call cJSON_AddFalseToObject (<4>, <9>)
<11> load int = 1
<12> load int = 0
<13> call cJSON_PrintBuffered ? (<4>, <11>, <12>)
)";

std::string SumProgram(int n, int len, bool tracked = true) {
  std::string bytes;
  for (int i = 0; i < n; ++i) bytes += (i ? ", " : "") + std::to_string(i + 1);
  return "<0> load Vec<char> = vec(" + std::to_string(n) + ")[" + bytes + "]\n" +
         "<1> load char* = &<0>\n<2> load int = " + std::to_string(len) + "\n" +
         "<3> call sum " + (tracked ? "? " : "") + "(<1>, <2>)\n";
}

TEST(ExecConfigTest, RejectsBadValues) {
  ExecConfig cfg;
  EXPECT_TRUE(cfg.Check().ok());
  cfg.timeout_ms = 0;
  EXPECT_FALSE(cfg.Check().ok());
  cfg = ExecConfig{};
  cfg.canary_page_bytes = 1000;
  EXPECT_FALSE(cfg.Check().ok());
  cfg = ExecConfig{};
  cfg.memory_limit_bytes = 0;
  EXPECT_FALSE(cfg.Check().ok());
}

TEST(ExecutorTest, ProgramWithoutCallsExitsOkWithNoCoverage) {
  auto exec = FixtureExecutor("arraylib");
  const auto& m = exec->manifest();
  auto r = exec->Execute(ParseOrDie("<0> load int = 0\n<1> load int = 3\n", m));
  EXPECT_EQ(r.exit, ExitKind::kOk);
  EXPECT_TRUE(r.coverage.empty());
  EXPECT_FALSE(r.fault.has_value());
  EXPECT_TRUE(r.calls.empty());
  EXPECT_EQ(exec->Execute(Program{}).exit, ExitKind::kOk);
}

TEST(ExecutorTest, ReadingExactlyTheArrayIsClean) {
  auto exec = FixtureExecutor("arraylib");
  for (int n : {1, 2, 7, 8, 16, 17, 100}) {
    auto r = exec->Execute(ParseOrDie(SumProgram(n, n), exec->manifest()));
    EXPECT_EQ(r.exit, ExitKind::kOk) << n;
    ASSERT_EQ(r.calls.size(), 1u);
    EXPECT_TRUE(r.calls[0].returned);
    EXPECT_EQ(r.calls[0].ret, static_cast<uint64_t>(n * (n + 1) / 2)) << n;
  }
}

TEST(ExecutorTest, ReadingOnePastTheArrayHitsTheCanary) {
  auto exec = FixtureExecutor("arraylib");
  for (int n : {1, 5, 16, 40}) {
    auto r = exec->Execute(ParseOrDie(SumProgram(n, n + 1), exec->manifest()));
    EXPECT_EQ(r.exit, ExitKind::kFault);
    ASSERT_TRUE(r.fault.has_value());
    EXPECT_EQ(r.fault->kind, FaultKind::kCanaryHit);
    EXPECT_EQ(r.fault->stmt, 3u);
    EXPECT_EQ(r.exit_stmt, 3u);
    EXPECT_EQ(r.fault->function, "sum");
    EXPECT_EQ(r.fault->crash_site, MakeCrashSite("sum", 10));
    // The faulting address is the first byte past the array.
    const MemoryRegion* array = nullptr;
    for (const auto& reg : r.regions) {
      if (reg.stmt == 0) array = &reg;
    }
    ASSERT_NE(array, nullptr);
    EXPECT_EQ(array->size, static_cast<uint64_t>(n));
    EXPECT_EQ(r.fault->address, array->base + array->size);
  }
}

TEST(ExecutorTest, NullArgumentDereferenceIsNullDeref) {
  auto exec = FixtureExecutor("nonnull");
  auto r = exec->Execute(ParseOrDie("<0> load int* = null\n<1> call peek ? (<0>)\n", exec->manifest()));
  EXPECT_EQ(r.exit, ExitKind::kFault);
  ASSERT_TRUE(r.fault);
  EXPECT_EQ(r.fault->kind, FaultKind::kNullDeref);
  EXPECT_LT(r.fault->address, kNearNullThreshold);
  EXPECT_EQ(r.fault->stmt, 1u);
  EXPECT_TRUE(r.coverage.empty());
}

TEST(ExecutorTest, FailedNonNullAssertStopsTheProgram) {
  auto exec = FixtureExecutor("cjson");
  auto r = exec->Execute(ParseOrDie(kCjsonNullParse, exec->manifest()));
  EXPECT_EQ(r.exit, ExitKind::kAssertFailed);
  EXPECT_EQ(r.exit_stmt, 5u);
  EXPECT_FALSE(r.fault.has_value());
  EXPECT_FALSE(r.IsCrash());
  EXPECT_TRUE(r.NormalExit());
  ASSERT_EQ(r.calls.size(), 1u);
  EXPECT_EQ(r.calls[0].function, "cJSON_ParseWithOpts");
  EXPECT_EQ(r.calls[0].ret, 0u);
  EXPECT_TRUE(r.coverage.empty());
}

TEST(ExecutorTest, UpdateLinksALoadedRecordIntoAReturnedObject) {
  auto exec = FixtureExecutor("cjson");
  std::string text = kCjsonNullParse;
  text.replace(text.find("vec(32)[\"GXsAAAAAAAAAo9tsrXXoqw57jwAAAAAAAAARNk+1AAA=\"]"),
               std::string("vec(32)[\"GXsAAAAAAAAAo9tsrXXoqw57jwAAAAAAAAARNk+1AAA=\"]").size(),
               "vec(3)[123, 125, 0]");
  auto r = exec->Execute(ParseOrDie(text, exec->manifest()));
  EXPECT_EQ(r.exit, ExitKind::kOk);
  ASSERT_EQ(r.calls.size(), 3u);
  // PrintBuffered walked two children: the added item and the loaded record.
  std::vector<uint32_t> keys = r.CoverageKeys();
  uint32_t ctx = ContextHash("cJSON_PrintBuffered");
  auto hits = [&](uint32_t site) {
    for (const auto& e : r.coverage) {
      if (e.key == CoverageKey(site, ctx)) return e.hits;
    }
    return 0u;
  };
  EXPECT_EQ(hits(2), 1u);
  EXPECT_EQ(hits(4), 2u);
  EXPECT_EQ(hits(6), 1u);
  for (const auto& e : r.coverage) EXPECT_EQ(e.first_stmt, 13u);
}

TEST(ExecutorTest, CoverageRequiresTrackedCalls) {
  auto exec = FixtureExecutor("arraylib");
  auto tracked = exec->Execute(ParseOrDie(SumProgram(4, 4, true), exec->manifest()));
  auto untracked = exec->Execute(ParseOrDie(SumProgram(4, 4, false), exec->manifest()));
  EXPECT_FALSE(tracked.coverage.empty());
  EXPECT_TRUE(untracked.coverage.empty());
  EXPECT_EQ(tracked.calls, untracked.calls);
}

TEST(ExecutorTest, CoverageIsContextSensitive) {
  auto exec = FixtureExecutor("arraylib");
  auto r = exec->Execute(ParseOrDie(R"(<0> load char* = null
<1> load int = 0
<2> call sum ? (<0>, <1>)
<3> call peek_tail ? (<0>)
)",
                                    exec->manifest()));
  EXPECT_EQ(r.exit, ExitKind::kOk);
  std::vector<uint32_t> expected = {CoverageKey(1, ContextHash("sum")),
                                    CoverageKey(1, ContextHash("peek_tail"))};
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(r.CoverageKeys(), expected);
}

TEST(ExecutorTest, SameProgramSameReport) {
  std::vector<std::pair<std::string, std::string>> cases = {
      {"arraylib", SumProgram(9, 9)},
      {"arraylib", SumProgram(9, 12)},
      {"cjson", kCjsonNullParse},
      {"pcap-like", LoadFixture(APIFUZZ_FIXTURE_DIR, "pcap-like")->bugs[0].program},
      {"handle-lib",
       "<0> load int = 2\n<1> call ctx_open (<0>)\n<2> load int = 23130\n"
       "<3> call ctx_use ? (<1>, <2>)\n<4> call ctx_use ? (<1>, <2>)\n<5> call ctx_use ? (<1>, <2>)\n"},
  };
  for (const auto& [fixture, text] : cases) {
    auto a = FixtureExecutor(fixture);
    auto b = FixtureExecutor(fixture);
    Program p = ParseOrDie(text, a->manifest());
    auto first = a->Execute(p);
    EXPECT_EQ(first, a->Execute(p)) << fixture;
    // Addresses are part of the report, so a fresh executor must agree too.
    EXPECT_EQ(first, b->Execute(p)) << fixture;
  }
}

// Coverage and calls of a program that exits at statement k equal those of
// its prefix ending at k.
TEST(ExecutorTest, ExitAtStatementMatchesPrefix) {
  auto exec = FixtureExecutor("handle-lib");
  const auto& m = exec->manifest();
  Program p = ParseOrDie(R"(<0> load int = 1
<1> call ctx_open ? (<0>)
<2> load int = 23130
<3> call ctx_use ? (<1>, <2>)
<4> call ctx_close ? (<1>)
<5> call ctx_use ? (<1>, <2>)
<6> call ctx_open ? (<0>)
<7> call ctx_use ? (<6>, <2>)
)",
                         m);
  auto full = exec->Execute(p);
  EXPECT_EQ(full.exit, ExitKind::kUseAfterFree);
  EXPECT_EQ(full.exit_stmt, 5u);
  Program prefix = p;
  prefix.mutable_statements().resize(full.exit_stmt + 1);
  auto pre = exec->Execute(prefix);
  EXPECT_EQ(pre.exit, full.exit);
  EXPECT_EQ(pre.coverage, full.coverage);
  EXPECT_EQ(pre.calls, full.calls);
  for (const auto& e : full.coverage) EXPECT_LE(e.first_stmt, full.exit_stmt);
  for (const auto& c : full.calls) EXPECT_LE(c.stmt, full.exit_stmt);
}

TEST(ExecutorTest, UnknownOrInvalidProgramsAreRejectedByCheckedExecute) {
  auto exec = FixtureExecutor("arraylib");
  auto bad = ParseProgram("<0> load int = 1\n<1> call peek_tail (<0>)\n", exec->manifest().types());
  ASSERT_TRUE(bad.ok());
  auto r = exec->ExecuteChecked(*bad);
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(exec->execs(), 0u);
  auto good = exec->ExecuteChecked(ParseOrDie(SumProgram(2, 2), exec->manifest()));
  ASSERT_TRUE(good.ok()) << good.status();
  EXPECT_EQ(exec->execs(), 1u);
}

TEST(ExecutorTest, SurvivesAThousandConsecutiveCrashes) {
  auto exec = FixtureExecutor("arraylib");
  Program crash = ParseOrDie(SumProgram(3, 4), exec->manifest());
  Program clean = ParseOrDie(SumProgram(3, 3), exec->manifest());
  auto reference = exec->Execute(clean);
  for (int i = 0; i < 1000; ++i) {
    auto r = exec->Execute(crash);
    ASSERT_EQ(r.exit, ExitKind::kFault) << i;
  }
  EXPECT_EQ(exec->Execute(clean), reference);
  EXPECT_EQ(exec->execs(), 1002u);
}

TEST(ExecutorTest, UseAfterFreeIsDetectedBeforeTheCall) {
  auto exec = FixtureExecutor("handle-lib");
  auto r = exec->Execute(ParseOrDie(R"(<0> load int = 0
<1> call ctx_open (<0>)
<2> call ctx_close (<1>)
<3> load int = 7
<4> call ctx_use ? (<1>, <3>)
)",
                                    exec->manifest()));
  EXPECT_EQ(r.exit, ExitKind::kUseAfterFree);
  EXPECT_EQ(r.exit_stmt, 4u);
  EXPECT_FALSE(r.IsCrash());
  EXPECT_EQ(r.calls.size(), 2u);
}

TEST(ExecutorTest, DoubleReleaseAborts) {
  auto fx = LoadFixture(APIFUZZ_FIXTURE_DIR, "pcap-like");
  ASSERT_TRUE(fx.ok());
  auto exec = FixtureExecutor("pcap-like");
  auto r = exec->Execute(ParseOrDie(fx->bugs[0].program, exec->manifest()));
  EXPECT_EQ(r.exit, ExitKind::kFault);
  ASSERT_TRUE(r.fault);
  EXPECT_EQ(r.fault->kind, FaultKind::kAbort);
  EXPECT_EQ(r.fault->function, "pc_activate");
  int allocs = 0, frees = 0;
  for (const auto& e : r.resource_log) {
    allocs += e.kind == ResourceEvent::Kind::kAlloc;
    frees += e.kind == ResourceEvent::Kind::kFree;
  }
  EXPECT_GE(allocs, 1);
  EXPECT_GE(frees, 1);
}

TEST(ExecutorTest, LargeAllocationIsOomAndSlowOneTimesOut) {
  auto exec = FixtureExecutor("resource");
  const auto& m = exec->manifest();
  auto reserve = [&](int exp) {
    return exec->Execute(ParseOrDie("<0> load int = " + std::to_string(exp) +
                                        "\n<1> call reserve ? (<0>)\n",
                                    m));
  };
  EXPECT_EQ(reserve(29).exit, ExitKind::kOk);
  auto oom = reserve(30);
  EXPECT_EQ(oom.exit, ExitKind::kOom);
  ASSERT_TRUE(oom.fault);
  EXPECT_EQ(oom.fault->kind, FaultKind::kOom);
  EXPECT_TRUE(oom.IsCrash());

  ExecConfig fast;
  fast.timeout_ms = 10;
  auto quick = FixtureExecutor("resource", fast);
  auto slow = quick->Execute(ParseOrDie("<0> load int = 27\n<1> call reserve (<0>)\n", m));
  EXPECT_EQ(slow.exit, ExitKind::kTimeout);
  ASSERT_TRUE(slow.fault);
  EXPECT_EQ(slow.fault->kind, FaultKind::kTimeout);
  EXPECT_EQ(slow.virtual_time, 10u * kTicksPerMs);
  auto ok = quick->Execute(ParseOrDie("<0> load int = 12\n<1> call reserve (<0>)\n", m));
  EXPECT_EQ(ok.exit, ExitKind::kOk);
  EXPECT_LT(ok.virtual_time, 10u * kTicksPerMs);
}

TEST(ExecutorTest, VirtualTimeGrowsWithWork) {
  auto exec = FixtureExecutor("resource");
  const auto& m = exec->manifest();
  uint64_t prev = 0;
  for (int exp : {4, 14, 18, 22}) {
    auto r = exec->Execute(ParseOrDie("<0> load int = " + std::to_string(exp) +
                                          "\n<1> call reserve (<0>)\n",
                                      m));
    EXPECT_GT(r.virtual_time, prev) << exp;
    prev = r.virtual_time;
  }
}

TEST(ExecutorTest, FilesLiveInTheSandboxForOneExecution) {
  auto exec = FixtureExecutor("filelib");
  const auto& m = exec->manifest();
  Program p = ParseOrDie(R"(<0> load Vec<u8> = vec(6)[99, 102, 103, 61, 49, 10]
<1> file read <0>
<2> call load_config ? (<1>)
)",
                         m);
  auto r = exec->Execute(p);
  EXPECT_EQ(r.exit, ExitKind::kOk);
  ASSERT_EQ(r.calls.size(), 1u);
  EXPECT_EQ(r.calls[0].ret, 6u);
  uint32_t ctx = ContextHash("load_config");
  std::vector<uint32_t> keys = r.CoverageKeys();
  for (uint32_t site : {3u, 4u, 5u, 7u}) {
    EXPECT_TRUE(std::binary_search(keys.begin(), keys.end(), CoverageKey(site, ctx))) << site;
  }
  ASSERT_EQ(r.resource_log.size(), 1u);
  EXPECT_EQ(r.resource_log[0].kind, ResourceEvent::Kind::kFileOpen);
  fs::path opened(r.resource_log[0].name);
  EXPECT_EQ(opened.parent_path(), fs::path(exec->files_dir()));
  EXPECT_EQ(fs::path(exec->files_dir()).parent_path(), fs::path(exec->sandbox_dir()));
  // Removed after the run.
  EXPECT_FALSE(fs::exists(opened));
  EXPECT_TRUE(fs::is_empty(exec->files_dir()));
}

TEST(ExecutorTest, RandomFileContentIsDeterministic) {
  auto exec = FixtureExecutor("filelib");
  Program p = ParseOrDie("<0> file read\n<1> call load_config ? (<0>)\n", exec->manifest());
  auto a = exec->Execute(p);
  EXPECT_EQ(a.exit, ExitKind::kOk);
  EXPECT_EQ(a, exec->Execute(p));
  ASSERT_EQ(a.calls.size(), 1u);
  EXPECT_LE(a.calls[0].ret, 64u);
}

TEST(ExecutorTest, TargetsCannotOpenPathsOutsideTheSandbox) {
  auto exec = FixtureExecutor("filelib");
  auto r = exec->Execute(ParseOrDie(R"(<0> load Vec<char> = vec(12)[47, 101, 116, 99, 47, 104, 111, 115, 116, 115, 0, 0]
<1> load char* = &<0>
<2> call load_config ? (<1>)
)",
                                    exec->manifest()));
  EXPECT_EQ(r.exit, ExitKind::kOk);
  ASSERT_EQ(r.calls.size(), 1u);
  EXPECT_EQ(r.calls[0].ret, static_cast<uint64_t>(-2));
  ASSERT_EQ(r.calls[0].arg_strings.size(), 1u);
  EXPECT_EQ(r.calls[0].arg_strings[0].second, "/etc/hosts");
}

TEST(ExecutorTest, PrivateSandboxIsRemoved) {
  std::string dir;
  {
    auto exec = FixtureExecutor("filelib");
    dir = exec->sandbox_dir();
    EXPECT_TRUE(fs::is_directory(dir));
  }
  EXPECT_FALSE(fs::exists(dir));
}

TEST(ExecutorTest, CmpEventsAreLogged) {
  auto exec = FixtureExecutor("handle-lib");
  auto r = exec->Execute(ParseOrDie(
      "<0> load int = 1\n<1> call ctx_open (<0>)\n<2> load int = 99\n<3> call ctx_use (<1>, <2>)\n",
      exec->manifest()));
  ASSERT_EQ(r.cmp_log.size(), 1u);
  EXPECT_EQ(r.cmp_log[0].a, 99u);
  EXPECT_EQ(r.cmp_log[0].b, 0x5a5au);
  EXPECT_EQ(r.cmp_log[0].stmt, 3u);
}

TEST(ExecutorFactoryTest, LibraryMustCoverTheManifest) {
  const auto& m = FixtureManifest("cjson");
  ExecConfig cfg;
  EXPECT_FALSE(MakeSyntheticExecutor(m, *FindSyntheticLibrary("arraylib"), cfg).ok());
  EXPECT_TRUE(MakeSyntheticExecutor(m, *FindSyntheticLibrary("cjson"), cfg).ok());
}

}  // namespace
}  // namespace apifuzz

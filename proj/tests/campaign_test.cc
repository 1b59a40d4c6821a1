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


#include "apifuzz/campaign.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "apifuzz/cli.h"
#include "apifuzz/dsl.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace apifuzz {
namespace {

namespace fs = std::filesystem;
using ::apifuzz::testing::FixturePath;
using ::apifuzz::testing::ParseOrDie;
using ::apifuzz::testing::ReadFileOrDie;

std::string FreshDir(const std::string& name) {
  fs::path dir = fs::path(::testing::TempDir()) / ("campaign_test_" + name);
  fs::remove_all(dir);
  return dir.string();
}

CampaignConfig Config(const std::string& fixture, const std::string& out, uint64_t execs,
                      uint64_t seed = 1) {
  CampaignConfig cfg;
  cfg.manifest_path = FixturePath(fixture + "/manifest.json");
  cfg.out_dir = out;
  cfg.execs = execs;
  cfg.seed = seed;
  return cfg;
}

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> Names(const fs::path& dir) {
  std::vector<std::string> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

TEST(SummaryTest, SchemaAndKeyOrder) {
  RunSummary s{10, 2, 1, 3, 4, 5};
  EXPECT_EQ(s.ToJson(),
            "{\n  \"schema\": 1,\n  \"execs\": 10,\n  \"seeds\": 2,\n  \"unique-crashes\": 1,\n"
            "  \"spurious-filtered\": 3,\n  \"constraints-learned\": 4,\n  \"coverage-count\": 5\n}\n");
  auto back = RunSummary::FromJson(s.ToJson());
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, s);
  EXPECT_FALSE(RunSummary::FromJson("{\"schema\": 2}").ok());
}

TEST(CampaignTest, ConfigNeedsExactlyOneBudget) {
  CampaignConfig cfg = Config("arraylib", FreshDir("config"), 0);
  EXPECT_FALSE(cfg.Check().ok());
  cfg.execs = 10;
  EXPECT_TRUE(cfg.Check().ok());
  cfg.seconds = 10;
  EXPECT_FALSE(cfg.Check().ok());
}

TEST(CampaignTest, BudgetIsNeverExceeded) {
  for (const char* fixture : {"arraylib", "nonnull", "resource", "pcap-like", "cjson"}) {
    for (uint64_t budget : {1u, 7u, 250u, 3000u}) {
      std::string dir = FreshDir("budget");
      auto c = Campaign::Open(Config(fixture, dir, budget));
      ASSERT_TRUE(c.ok()) << c.status();
      auto s = (*c)->Run();
      ASSERT_TRUE(s.ok());
      EXPECT_LE(s->execs, budget + 1) << fixture;
      EXPECT_GE(s->execs, budget) << fixture;
    }
  }
}

TEST(CampaignTest, WritesArtifacts) {
  std::string dir = FreshDir("artifacts");
  auto c = Campaign::Open(Config("arraylib", dir, 200000));
  ASSERT_TRUE(c.ok());
  auto s = (*c)->Run();
  ASSERT_TRUE(s.ok());
  EXPECT_GE(s->unique_crashes, 1u);
  EXPECT_EQ(ReadFileOrDie(dir + "/summary.json"), s->ToJson());
  EXPECT_EQ(Names(dir + "/corpus").size(), s->seeds);
  EXPECT_EQ(Names(dir + "/crashes").size(), 2 * s->unique_crashes);
  auto store = ConstraintStore::FromJsonLines(ReadFileOrDie(dir + "/constraints.jsonl"));
  ASSERT_TRUE(store.ok());
  EXPECT_EQ(store->active().size(), s->constraints_learned);
  // Every seed validates and executes without a fault.
  for (const auto& name : Names(dir + "/corpus")) {
    Program p = ParseOrDie(ReadFileOrDie(dir + "/corpus/" + name), (*c)->manifest());
    EXPECT_FALSE((*c)->executor().Execute(p).IsCrash()) << name;
  }
  // One crash per (site, function).
  auto crashes = ListCrashes(dir);
  ASSERT_TRUE(crashes.ok());
  std::set<CrashKey> keys;
  for (const auto& cr : *crashes) EXPECT_TRUE(keys.insert(cr.key).second);
}

TEST(CampaignTest, SecondCampaignOnSameDirectoryIsRefused) {
  std::string dir = FreshDir("lock");
  auto first = Campaign::Open(Config("arraylib", dir, 10));
  ASSERT_TRUE(first.ok());
  auto second = Campaign::Open(Config("arraylib", dir, 10));
  EXPECT_EQ(second.status().code(), absl::StatusCode::kFailedPrecondition);
  first->reset();
  EXPECT_TRUE(Campaign::Open(Config("arraylib", dir, 10)).ok());
}

TEST(CampaignTest, SameSeedSameArtifacts) {
  for (const char* fixture : {"arraylib", "pcap-like", "sqlite-like", "cjson"}) {
    std::vector<std::string> summaries, corpora;
    for (int run = 0; run < 2; ++run) {
      std::string dir = FreshDir(std::string("determinism") + std::to_string(run));
      auto c = Campaign::Open(Config(fixture, dir, 20000, 42));
      ASSERT_TRUE(c.ok());
      ASSERT_TRUE((*c)->Run().ok());
      summaries.push_back(ReadFileOrDie(dir + "/summary.json"));
      std::string all;
      for (const auto& n : Names(dir + "/corpus")) all += n + ReadFileOrDie(dir + "/corpus/" + n);
      all += ReadFileOrDie(dir + "/constraints.jsonl");
      corpora.push_back(all);
    }
    EXPECT_EQ(summaries[0], summaries[1]) << fixture;
    EXPECT_EQ(corpora[0], corpora[1]) << fixture;
  }
}

TEST(CampaignTest, ResumeReingestsCorpus) {
  std::string dir = FreshDir("resume");
  std::set<uint32_t> coverage;
  size_t seeds = 0;
  uint64_t constraints = 0;
  {
    auto c = Campaign::Open(Config("pcap-like", dir, 5000));
    ASSERT_TRUE(c.ok());
    ASSERT_TRUE((*c)->Run().ok());
    coverage = (*c)->coverage();
    seeds = (*c)->pool().size();
    constraints = (*c)->store().active().size();
  }
  auto c = Campaign::Open(Config("pcap-like", dir, 100));
  ASSERT_TRUE(c.ok());
  EXPECT_EQ((*c)->coverage(), coverage);
  EXPECT_EQ((*c)->pool().size(), seeds);
  EXPECT_EQ((*c)->store().active().size(), constraints);
  EXPECT_EQ((*c)->execs(), 0u);
  auto s = (*c)->Run();
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(s->execs, 5100u);
}

TEST(CampaignTest, CrashesKeepTheCampaignRunning) {
  std::string dir = FreshDir("isolation");
  auto c = Campaign::Open(Config("nonnull", dir, 100000));
  ASSERT_TRUE(c.ok());
  const Manifest& m = (*c)->manifest();
  Program good = ParseOrDie("<0> load int = 7\n<1> load int* = &<0>\n<2> call target: peek ? (<1>)\n", m);
  Program bad = ParseOrDie("<0> load int* = null\n<1> call target: peek ? (<0>)\n", m);
  FeedbackReport before = (*c)->executor().Execute(good);
  for (int i = 0; i < 1000; ++i) (*c)->Process(bad);
  EXPECT_EQ((*c)->executor().Execute(good), before);
  EXPECT_EQ((*c)->crashes().size(), 0u);
  EXPECT_EQ((*c)->store().active().size(), 1u);
  EXPECT_EQ((*c)->Process(good), Outcome::kNewSeed);
  EXPECT_TRUE((*c)->Run().ok());
}

TEST(CliTest, Usage) {
  std::string manifest = FixturePath("arraylib/manifest.json");
  std::string dir = FreshDir("cli_usage");
  EXPECT_EQ(Cli({}).code, kExitUsage);
  EXPECT_EQ(Cli({"bogus"}).code, kExitUsage);
  EXPECT_EQ(Cli({"fuzz", "--manifest", manifest, "--out", dir, "--execs", "0", "--seed", "1"}).code,
            kExitUsage);
  EXPECT_EQ(Cli({"fuzz", "--manifest", manifest, "--out", dir, "--seed", "1"}).code, kExitUsage);
  EXPECT_EQ(Cli({"fuzz", "--manifest", manifest, "--out", dir, "--execs", "5", "--seconds", "5",
                 "--seed", "1"})
                .code,
            kExitUsage);
  EXPECT_EQ(Cli({"fuzz", "--manifest", manifest, "--out", dir, "--execs", "5", "--seed", "1",
                 "--backend", "other"})
                .code,
            kExitUsage);
  EXPECT_EQ(Cli({"fuzz", "--manifest", "/nonexistent.json", "--out", dir, "--execs", "5", "--seed", "1"}).code,
            kExitTargetError);
}

TEST(CliTest, FuzzExitCodes) {
  std::string dir = FreshDir("cli_fuzz");
  auto r = Cli({"fuzz", "--manifest", FixturePath("arraylib/manifest.json"), "--out", dir, "--execs",
                "50000", "--seed", "3"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out, ReadFileOrDie(dir + "/summary.json"));
  std::string quiet = FreshDir("cli_quiet");
  r = Cli({"fuzz", "--manifest", FixturePath("cjson/manifest.json"), "--out", quiet, "--execs", "200",
           "--seed", "3"});
  EXPECT_EQ(r.code, kExitNoFindings);
  r = Cli({"fuzz", "--manifest", FixturePath("cjson/manifest.json"), "--out", FreshDir("cli_quiet2"),
           "--execs", "200", "--seed", "3", "--zero-findings-exit", "0"});
  EXPECT_EQ(r.code, kExitOk);
}

TEST(CliTest, ReplayTriageTranslateStats) {
  std::string dir = FreshDir("cli_tools");
  ASSERT_EQ(Cli({"fuzz", "--manifest", FixturePath("arraylib/manifest.json"), "--out", dir, "--execs",
                 "100000", "--seed", "1"})
                .code,
            kExitOk);
  auto crashes = ListCrashes(dir);
  ASSERT_TRUE(crashes.ok());
  ASSERT_FALSE(crashes->empty());
  for (const auto& c : *crashes) {
    auto r = Cli({"replay", dir + "/crashes/" + c.stem + ".hdsl"});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("exit: " + c.exit), std::string::npos) << r.out;
    EXPECT_NE(r.out.find(c.fault), std::string::npos) << r.out;
  }
  auto t = Cli({"triage", "--out", dir});
  EXPECT_EQ(t.code, kExitOk);
  EXPECT_NE(t.out.find("group-000.c"), std::string::npos) << t.out;
  EXPECT_TRUE(fs::exists(dir + "/triage/group-000.c"));
  auto s = Cli({"stats", "--out", dir});
  EXPECT_EQ(s.code, kExitOk);
  EXPECT_NE(s.out.find("sum arg1 EQUAL len(arg0)"), std::string::npos) << s.out;
  auto c = Cli({"translate", dir + "/crashes/" + crashes->front().stem + ".hdsl", "--manifest",
                FixturePath("arraylib/manifest.json")});
  EXPECT_EQ(c.code, kExitOk) << c.err;
  EXPECT_NE(c.out.find("peek_tail("), std::string::npos) << c.out;
}

TEST(CliTest, ReplayEdgeCases) {
  std::string dir = FreshDir("cli_replay");
  fs::create_directories(dir);
  std::string manifest = FixturePath("arraylib/manifest.json");
  std::ofstream(dir + "/empty.hdsl") << "";
  std::ofstream(dir + "/corrupt.hdsl") << "<0> load int = \n<1> call nothing (<7>)\n";
  auto r = Cli({"replay", dir + "/empty.hdsl", "--manifest", manifest});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("exit: ok"), std::string::npos);
  EXPECT_NE(Cli({"replay", dir + "/corrupt.hdsl", "--manifest", manifest}).code, kExitOk);
  EXPECT_NE(Cli({"replay", dir + "/missing.hdsl", "--manifest", manifest}).code, kExitOk);
  EXPECT_EQ(Cli({"replay", dir + "/empty.hdsl"}).code, kExitUsage);
}

// Hand-made crash directory: two crashes at one site and one that breaks
// a stored NON-NULL constraint.
TEST(CliTest, TriageGroupsAndFlags) {
  std::string dir = FreshDir("cli_triage");
  fs::create_directories(dir + "/crashes");
  std::string manifest = FixturePath("nonnull/manifest.json");
  auto exec = testing::FixtureExecutor("nonnull");
  const Manifest& m = exec->manifest();
  std::ofstream(dir + "/run.json") << "{\"manifest\": \"" << manifest << "\", \"backend\": \"synthetic\"}";
  ConstraintStore store;
  Constraint nn;
  nn.function = "peek";
  nn.kind = ConstraintKind::kNonNull;
  store.Add(nn);
  std::ofstream(dir + "/constraints.jsonl") << store.ToJsonLines();
  const char* programs[] = {
      "<0> load int* = null\n<1> call target: peek ? (<0>)\n",
      "<0> load int = 3\n<1> load int* = null\n<2> call target: peek ? (<1>)\n",
  };
  int id = 1;
  for (const char* text : programs) {
    Program p = ParseOrDie(text, m);
    FeedbackReport r = exec->Execute(p);
    ASSERT_TRUE(r.IsCrash());
    std::string stem = dir + "/crashes/00000" + std::to_string(id++);
    std::ofstream(stem + ".hdsl") << SerializeProgram(p, m.types());
    std::ofstream(stem + ".report.json") << ReportToJson(r, m);
  }
  auto t = Cli({"triage", "--out", dir});
  EXPECT_EQ(t.code, kExitOk);
  std::vector<std::string> lines;
  std::istringstream in(t.out);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 2u) << t.out;
  EXPECT_NE(lines[1].find(" 2 "), std::string::npos) << lines[1];
  EXPECT_NE(lines[1].find("yes"), std::string::npos) << lines[1];
  EXPECT_TRUE(fs::exists(dir + "/triage/group-000.c"));
  auto empty = FreshDir("cli_triage_empty");
  fs::create_directories(empty);
  auto e = Cli({"triage", "--out", empty});
  EXPECT_EQ(e.code, kExitOk);
  EXPECT_EQ(std::count(e.out.begin(), e.out.end(), '\n'), 1);
}

}  // namespace
}  // namespace apifuzz

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


// A fuzzing campaign over one manifest, persisted in an output directory.
//
//   <out>/corpus/<seed-id>.hdsl
//   <out>/crashes/<crash-id>.hdsl and <crash-id>.report.json
//   <out>/constraints.jsonl
//   <out>/summary.json
//   <out>/run.json       manifest path, backend and seed
//   <out>/sandbox/       executor files
//   <out>/.lock
//
// The campaign runs pilot rounds for every API function, then evolves the
// seed pool. Crashes go through crash inference; only candidate bugs are
// written, one per (crash site, function).

#ifndef APIFUZZ_CAMPAIGN_H_
#define APIFUZZ_CAMPAIGN_H_

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "apifuzz/constraints.h"
#include "apifuzz/executor.h"
#include "apifuzz/feedback.h"
#include "apifuzz/generator.h"
#include "apifuzz/manifest.h"

namespace apifuzz {

enum class BackendKind { kSynthetic, kFfi };

struct CampaignConfig {
  std::string manifest_path;
  std::string out_dir;
  // Exactly one budget is positive.
  uint64_t execs = 0;
  uint64_t seconds = 0;
  uint64_t seed = 0;
  BackendKind backend = BackendKind::kSynthetic;
  // Shared library for the FFI backend. Empty: lib<library>.so next to
  // the manifest.
  std::string library_path;
  // Evolution starts once every function had a pilot round and this
  // fraction of the budget is spent.
  double pilot_fraction = 0.1;
  uint64_t max_seed_minimize_execs = 512;
  size_t max_cmp_literals = 256;
  GenConfig gen;
  InferConfig infer;
  ExecConfig exec;

  absl::Status Check() const;
};

inline constexpr int kSummarySchema = 1;

struct RunSummary {
  uint64_t execs = 0;
  uint64_t seeds = 0;
  uint64_t unique_crashes = 0;
  uint64_t spurious_filtered = 0;
  uint64_t constraints_learned = 0;
  uint64_t coverage_count = 0;

  std::string ToJson() const;
  static absl::StatusOr<RunSummary> FromJson(std::string_view text);
  bool operator==(const RunSummary&) const = default;
};

// Dedup key of a crash.
struct CrashKey {
  uint64_t crash_site = 0;
  std::string function;
  auto operator<=>(const CrashKey&) const = default;
};

struct CrashRecord {
  uint64_t id = 0;
  CrashKey key;
  Program program;
  FeedbackReport report;
};

// What one execution of a candidate led to.
enum class Outcome { kSkipped, kNoGain, kNewSeed, kSpuriousCrash, kNewCrash, kDuplicateCrash };

class Campaign {
 public:
  // Takes the out-dir lock, loads the manifest and constraints, builds
  // the executor and re-ingests an existing corpus.
  static absl::StatusOr<std::unique_ptr<Campaign>> Open(CampaignConfig cfg);
  ~Campaign();

  // Runs until the budget is spent and writes every artifact.
  absl::StatusOr<RunSummary> Run();

  // Executes one candidate and learns from it. `inserted` lists positions
  // of calls a mutation inserted before the target.
  Outcome Process(const Program& p, const std::vector<size_t>& inserted = {});

  // Replays each stored crash with the current constraints applied and
  // drops the ones that stop crashing.
  void Retriage();

  absl::Status Save() const;
  RunSummary Summary() const;

  const Manifest& manifest() const { return manifest_; }
  Executor& executor() { return *exec_; }
  const ConstraintStore& store() const { return store_; }
  const SeedPool& pool() const { return pool_; }
  const RelationGraph& relations() const { return relations_; }
  const std::set<uint32_t>& coverage() const { return coverage_; }
  const std::map<CrashKey, CrashRecord>& crashes() const { return crashes_; }
  // Executions counted against the budget. Corpus re-ingestion and crash
  // re-triage are not counted.
  uint64_t execs() const;
  bool BudgetLeft() const;

 private:
  explicit Campaign(CampaignConfig cfg);
  absl::Status Init();
  absl::Status Ingest();
  uint64_t Remaining() const;
  uint64_t NextId() { return next_id_++; }
  void NoteCmp(const FeedbackReport& r);
  void AddSeed(uint64_t id, Program p, std::vector<uint32_t> fresh, const FeedbackReport& r);
  void ForgetCrash(const CrashKey& key);

  CampaignConfig cfg_;
  Manifest manifest_;
  std::unique_ptr<Executor> exec_;
  std::unique_ptr<Generator> gen_;
  ConstraintStore store_;
  RelationGraph relations_;
  EffectiveArgCache arg_cache_;
  SeedPool pool_;
  Rng rng_;
  std::set<uint32_t> coverage_;
  std::map<CrashKey, CrashRecord> crashes_;
  std::set<uint64_t> cmp_seen_;
  std::vector<uint64_t> cmp_literals_;
  uint64_t overhead_execs_ = 0;
  uint64_t prior_execs_ = 0;
  uint64_t next_id_ = 0;
  uint64_t spurious_ = 0;
  uint64_t learned_ = 0;
  uint64_t triaged_version_ = 0;
  double start_seconds_ = 0;
  int lock_fd_ = -1;
};

// Backend for a manifest: the synthetic fixture named by its library, or
// the shared library at `library_path`.
absl::StatusOr<std::unique_ptr<Executor>> MakeExecutor(const Manifest& m, BackendKind backend,
                                                       const std::string& library_path,
                                                       ExecConfig cfg);

// Crash files in a campaign directory.
struct StoredCrash {
  std::string stem;
  std::string program_text;
  CrashKey key;
  std::string exit;
  std::string fault;
};
absl::StatusOr<std::vector<StoredCrash>> ListCrashes(const std::string& out_dir);

std::string ReportToJson(const FeedbackReport& r, const Manifest& m);
std::string DescribeReport(const FeedbackReport& r);

}  // namespace apifuzz

#endif  // APIFUZZ_CAMPAIGN_H_

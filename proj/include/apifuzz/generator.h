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


// Program synthesis and evolution.
//
// The pilot phase builds one small program per API function with the
// function as the tracked target call. The evolution phase picks a seed,
// mutates weighted statements, repairs the result against learned
// constraints and strips statements nothing uses.

#ifndef APIFUZZ_GENERATOR_H_
#define APIFUZZ_GENERATOR_H_

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "absl/status/statusor.h"
#include "apifuzz/constraints.h"
#include "apifuzz/executor.h"
#include "apifuzz/manifest.h"
#include "apifuzz/program.h"
#include "apifuzz/value_gen.h"

namespace apifuzz {

struct GenConfig {
  double reuse_threshold = 0.7;
  double call_gen_threshold = 0.5;
  double relative_insert_prob = 0.3;
  size_t max_statements = 40;
  int max_depth = 4;
  // Probability that a fresh pointer argument is null.
  double null_pointer_prob = 0.1;
  // Depth handed to GenerateValue for fresh loads.
  int value_budget = 3;
  ValueGenConfig values;

  absl::Status Check() const;
};

struct SeedEntry {
  uint64_t id = 0;
  Program program;
  std::vector<uint32_t> new_coverage;
  uint64_t age = 0;
  uint64_t time = 0;
  size_t path_size = 0;
};

class SeedPool {
 public:
  void Add(SeedEntry e);
  // Makes every seed one round older.
  void Tick();

  // Probability of each seed being selected: 2^-age normalized, raised to
  // at least 1/size, then normalized again.
  std::vector<double> SelectionWeights() const;
  size_t Select(Rng& rng) const;

  const std::vector<SeedEntry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<SeedEntry> entries_;
};

// One evolution candidate.
struct Candidate {
  Program program;
  size_t seed = 0;
  // Positions in `program` of calls the mutation inserted before the
  // target.
  std::vector<size_t> inserted_calls;
  // Statements step 2 picked, by position in the seed.
  std::vector<size_t> picked;
};

class Generator : public ValueSynthesizer {
 public:
  Generator(const Manifest& m, GenConfig cfg = {});

  // Optional knowledge used when choosing relative calls and arguments.
  void set_relations(const RelationGraph* g) { relations_ = g; }
  void set_arg_cache(const EffectiveArgCache* c) { arg_cache_ = c; }
  void set_cmp_literals(std::vector<uint64_t> lits) { cmp_literals_ = std::move(lits); }

  const GenConfig& config() const { return cfg_; }
  const Manifest& manifest() const { return m_; }

  // Appends a call to `sig` to a normalized program, building each
  // argument by reuse, a producer call or a fresh load. Returns the call's
  // index.
  absl::StatusOr<StmtIndex> GenerateCall(Program& p, const FuncSig& sig, Rng& rng, int depth = 0);

  // A program whose only tracked call is a target call to `api`.
  absl::StatusOr<Program> PilotRound(const FuncSig& api, Rng& rng);

  // The five evolution steps. `store` may be null.
  absl::StatusOr<Candidate> EvolveRound(const SeedPool& pool, const ConstraintStore* store,
                                        Rng& rng);

  // Weight of each statement for step 2: 0 for asserts, files and
  // updates, 1 + mutation points for loads and calls.
  std::vector<uint64_t> StatementWeights(const Program& p) const;

  // One call mutation: replace an argument, insert a relative call before
  // it, or insert an update after it. Positions of inserted calls are
  // appended to `inserted`.
  Program MutateCall(const Program& p, size_t call_pos, Rng& rng,
                     std::vector<size_t>* inserted = nullptr);

  // Mutates the value of the load at `pos`.
  Program MutateLoad(const Program& p, size_t pos, Rng& rng);

  std::optional<StmtIndex> ProduceNonNull(Program& p, size_t pos, TypeId pointer_type,
                                          Rng& rng) override;

 private:
  absl::StatusOr<StmtIndex> GenerateCallWith(Program& p, const FuncSig& sig, Rng& rng, int depth,
                                             const std::map<size_t, StmtIndex>& forced);
  absl::StatusOr<StmtIndex> GenerateArg(Program& p, TypeId type, Rng& rng, int depth,
                                        bool allow_reuse);
  absl::StatusOr<StmtIndex> FreshLoad(Program& p, TypeId type, Rng& rng, bool allow_null);
  std::optional<StmtIndex> Producer(Program& p, TypeId type, Rng& rng, int depth);
  std::optional<StmtIndex> ReuseCandidate(const Program& p, TypeId type, Rng& rng) const;
  std::optional<size_t> PickRelative(const Program& p, size_t call_pos, Rng& rng) const;
  bool Chance(Rng& rng, double prob) const;

  const Manifest& m_;
  const TypeRegistry& reg_;
  GenConfig cfg_;
  const RelationGraph* relations_ = nullptr;
  const EffectiveArgCache* arg_cache_ = nullptr;
  std::vector<uint64_t> cmp_literals_;
};

// Runs `fn` on the statements before `pos` and splices whatever it
// appended in front of the statement at `pos`. Returns the number of
// statements added.
template <typename Fn>
size_t InsertBefore(Program& p, size_t pos, Fn&& fn) {
  std::vector<Statement> tail(p.mutable_statements().begin() + static_cast<ptrdiff_t>(pos),
                              p.mutable_statements().end());
  p.mutable_statements().resize(pos);
  fn(p);
  size_t added = p.size() - pos;
  for (auto& s : tail) {
    s.index += static_cast<StmtIndex>(added);
    RemapReferences(s, [&](StmtIndex i) { return i >= pos ? i + static_cast<StmtIndex>(added) : i; });
    p.mutable_statements().push_back(std::move(s));
  }
  return added;
}

// Backward sweep: drops loads and files nothing refers to, and asserts on
// dropped statements, until none is left. Calls and updates stay.
Program MinimizeAfterMutation(const Program& p);

// Greedy reduction of a new seed: drops statements, nulls pointers and
// shrinks arrays while the tracked coverage stays identical and the run
// does not crash. `execs` counts executions spent.
Program MinimizeNewSeed(const Program& p, const std::vector<uint32_t>& baseline, Executor& exec,
                        uint64_t* execs = nullptr, uint64_t max_execs = 512);

}  // namespace apifuzz

#endif  // APIFUZZ_GENERATOR_H_

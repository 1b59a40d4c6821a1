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


// Intra-API argument constraints and inter-API relations.
//
// A constraint pins a slot of some function's arguments: the parameter
// index plus a path into its value (through pointees, record fields and
// array elements). Constraints are learned from execution feedback, kept
// in a store, and used to repair programs before they run.

#ifndef APIFUZZ_CONSTRAINTS_H_
#define APIFUZZ_CONSTRAINTS_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "apifuzz/executor.h"
#include "apifuzz/feedback.h"
#include "apifuzz/manifest.h"
#include "apifuzz/program.h"
#include "apifuzz/value_gen.h"

namespace apifuzz {

enum class ConstraintKind { kNonNull, kFile, kEqual, kRange, kArrayLen, kCast };

std::string_view ConstraintKindName(ConstraintKind k);
std::optional<ConstraintKind> ParseConstraintKind(std::string_view name);

inline constexpr size_t kMaxLocatorDepth = 3;

struct Locator {
  uint32_t arg = 0;
  FieldPath path;
  bool operator==(const Locator&) const = default;
};

std::string LocatorToString(const Locator& l);

struct Constraint {
  std::string function;
  Locator locator;
  ConstraintKind kind = ConstraintKind::kNonNull;
  // EQUAL: the array whose length the slot must equal. RANGE: when set,
  // the slot must also stay below that array's length.
  std::optional<Locator> peer;
  // RANGE bounds, inclusive.
  std::optional<int64_t> min;
  std::optional<int64_t> max;
  // ARRAY-LEN.
  uint64_t min_len = 0;
  // CAST.
  std::string as_type;
  // How it was learned, and the program that showed it.
  std::string provenance;
  uint64_t witness = 0;

  // Same function, slot, kind and parameters; provenance ignored.
  bool SameAs(const Constraint& o) const;
};

std::string DescribeConstraint(const Constraint& c);

// One JSON object per line: {function, locator, kind, params, provenance,
// witness-program-id}; archived records carry "archived": true.
std::string ConstraintToJson(const Constraint& c, bool archived = false);
absl::StatusOr<std::pair<Constraint, bool>> ConstraintFromJson(std::string_view line);

class ConstraintStore {
 public:
  // Adds `c` unless an identical constraint is active. A constraint of the
  // same kind on the same slot, or an EQUAL/RANGE pair on the same slot, is
  // replaced and archived. Returns whether the active set changed.
  bool Add(Constraint c);
  // Archives active constraints on a slot of the given kind.
  bool Remove(std::string_view function, const Locator& locator, ConstraintKind kind,
              std::string_view provenance);

  const std::vector<Constraint>& active() const { return active_; }
  const std::vector<Constraint>& archived() const { return archived_; }
  std::vector<const Constraint*> For(std::string_view function) const;
  const Constraint* Find(std::string_view function, const Locator& locator,
                         ConstraintKind kind) const;

  // Records that a bare void* parameter has been seen. False if it was
  // seen before or any CAST on it is stored, active or archived.
  bool MarkCastCandidate(std::string_view function, uint32_t arg);

  uint64_t version() const { return version_; }

  std::string ToJsonLines() const;
  static absl::StatusOr<ConstraintStore> FromJsonLines(std::string_view text);

 private:
  std::vector<Constraint> active_;
  std::vector<Constraint> archived_;
  std::vector<std::pair<std::string, uint32_t>> cast_seen_;
  uint64_t version_ = 0;
};

// Where a locator lands inside a concrete program, for the call at `call_pos`.
struct SlotRef {
  // Load statement holding the slot, and the path inside its value.
  size_t pos = 0;
  FieldPath path;
};

std::optional<SlotRef> ResolveSlot(const Program& p, size_t call_pos, const Locator& l,
                                   const Manifest& m);

// Every slot reachable from a call's arguments, up to kMaxLocatorDepth
// path segments, paired with its type.
std::vector<std::pair<Locator, TypeId>> EnumerateSlots(const Program& p, size_t call_pos,
                                                       const Manifest& m);

// Type of a locator's slot within a function's parameters.
absl::StatusOr<TypeId> LocatorType(const FuncSig& sig, const Locator& l, const TypeRegistry& reg);

// Learns from a non-crashing run: FILE constraints for string arguments
// that were opened as files, provisional CAST for bare void* parameters.
std::vector<Constraint> InferFromPath(const Program& p, const FeedbackReport& r, const Manifest& m,
                                      ConstraintStore& store, uint64_t witness);

struct InferConfig {
  uint64_t pad_length = 64;
  uint32_t max_reexecs = 256;
  // Step 5 accepts a probe that takes less than this fraction of the
  // original run's time.
  double faster_fraction = 0.1;
};

// One row of the length probe: the program re-run with a numeric slot set
// to N-1, N and N+1, where N is the overflowed array's length.
struct LengthProbe {
  Locator slot;
  Locator array;
  uint64_t n = 0;
  std::array<bool, 3> crashed = {false, false, false};
};

struct CrashVerdict {
  enum class Kind { kSpurious, kCandidateBug };
  Kind kind = Kind::kCandidateBug;
  bool low_confidence = false;
  // Step that explained the crash, 0 if none did.
  int step = 0;
  // Newly stored constraints. A crash explained by a constraint that was
  // already stored is still spurious.
  std::vector<Constraint> learned;
  std::vector<Constraint> removed;
  std::vector<LengthProbe> probes;
  uint32_t reexecs = 0;
};

// Runs the ordered crash analysis on a crashing program. Any inference
// makes the crash spurious.
CrashVerdict InferFromCrash(const Program& p, const FeedbackReport& r, Executor& exec,
                            ConstraintStore& store, Rng& rng, uint64_t witness,
                            const InferConfig& cfg = {});

// Builds statements producing a non-null value of a pointer type. The
// generator implements it; refine calls back into it.
class ValueSynthesizer {
 public:
  virtual ~ValueSynthesizer() = default;
  // Inserts statements before `pos` and returns the index of one whose
  // value is a non-null `pointer_type`, or nullopt.
  virtual std::optional<StmtIndex> ProduceNonNull(Program& p, size_t pos, TypeId pointer_type,
                                                  Rng& rng) = 0;
};

// Repairs every slot of every call so that stored constraints hold. Fails
// when a constraint cannot be satisfied.
absl::StatusOr<Program> Refine(const Program& p, const ConstraintStore& store, const Manifest& m,
                               Rng& rng, ValueSynthesizer* synth, uint64_t pad_length = 64);

// Checks whether every call in `p` satisfies the stored constraints.
bool SatisfiesConstraints(const Program& p, const ConstraintStore& store, const Manifest& m);

enum class RelationRule { kRetToArg, kSharedArgType, kMutatorPointer };
std::string_view RelationRuleName(RelationRule r);

struct StaticEdge {
  std::string producer;
  std::string consumer;
  RelationRule rule = RelationRule::kRetToArg;
  bool identifier_match = false;
  bool operator==(const StaticEdge&) const = default;
};

struct EffectiveEdge {
  std::string from;
  std::string to;
  uint64_t witness = 0;
  bool operator==(const EffectiveEdge&) const = default;
};

struct RelationGraph {
  std::vector<StaticEdge> static_edges;
  std::vector<EffectiveEdge> effective_edges;

  bool HasStatic(std::string_view producer, std::string_view consumer) const;
  bool HasEffective(std::string_view from, std::string_view to) const;
  // Adds unless an edge with the same endpoints exists.
  bool AddEffective(EffectiveEdge e);
  // Functions related to `fn` by a static edge in either direction.
  std::vector<std::string> Neighbors(std::string_view fn) const;
};

// Edges from the three type-overlap rules: F1 returns a type F2 takes;
// F1 and F2 share a non-primitive parameter type; F1 takes T* and F2
// takes T.
RelationGraph InferStaticRelations(const Manifest& m);

struct EffectiveResult {
  std::vector<EffectiveEdge> kept;
  std::vector<std::string> dropped;
  // The seed with every dropped call removed.
  Program program;
};

// Deletion test for calls inserted before the target: each inserted call
// is removed in turn and the program re-run; a change in the target's
// coverage keeps the call.
EffectiveResult LearnEffectiveRelation(const Program& seed,
                                       const std::vector<size_t>& inserted_positions,
                                       const std::vector<uint32_t>& baseline_coverage,
                                       Executor& exec, uint64_t witness);

struct Slice {
  // Self-contained and normalized, with no tracked calls and no roles.
  Program program;
  // Position of the sliced value in `program`.
  size_t value = 0;
  bool operator==(const Slice&) const = default;
};

// Statement slices that produced arguments which led to new coverage.
class EffectiveArgCache {
 public:
  // Caches the statements `p` needs to produce argument `param` of the
  // call at `call_pos`.
  void Add(const Program& p, size_t call_pos, size_t param, const Manifest& m);
  const std::vector<Slice>* Get(std::string_view function, std::string_view param) const;
  size_t size() const;

 private:
  std::map<std::pair<std::string, std::string>, std::vector<Slice>> slices_;
};

// Statements `p` needs to produce the value at `pos` as it is when the
// statement at `before` runs: its references, calls before `before` that
// write through its address, and asserts on it.
Slice SliceFor(const Program& p, size_t pos, size_t before);

}  // namespace apifuzz

#endif  // APIFUZZ_CONSTRAINTS_H_

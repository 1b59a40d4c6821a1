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

// Type-aware generation and mutation of literal values.
//
// Both operations are pure given the random source. Mutations that need new
// statements (a fresh pointee array, a fresh producer call) cannot be done at
// the value level; they come back as a MutationRequest that the program
// generator fulfills.

#ifndef APIFUZZ_VALUE_GEN_H_
#define APIFUZZ_VALUE_GEN_H_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "apifuzz/types.h"
#include "apifuzz/value.h"

namespace apifuzz {

using Rng = std::mt19937_64;

struct ValueGenConfig {
  int64_t small_min = -256;
  int64_t small_max = 256;
  uint64_t max_generated_len = 64;
  uint64_t max_resized_len = 4096;
};

enum class MutationStrategy {
  kInteresting,
  kBitFlip,
  kByteFlip,
  kArith,
  kCmpLiteral,
  kMutateElements,
  kResize,
  kHavocBytes,
  kMutateField,
  kSetNull,
  kPointExisting,
  kPointFreshArray,
  kPointFreshCall,
  kToggleStub,
};

std::string_view MutationStrategyName(MutationStrategy s);

struct MutationRequest {
  enum class Kind { kFreshArray, kFreshCall };
  Kind kind = Kind::kFreshArray;
  // Where the pointer lives inside the mutated value.
  FieldPath path;
  TypeId pointer_type = kNoType;
};

struct MutationOutcome {
  Value value;
  MutationStrategy strategy = MutationStrategy::kInteresting;
  std::optional<MutationRequest> request;
};

struct MutationInputs {
  // Operands observed at compare sites during earlier executions.
  std::span<const uint64_t> cmp_literals;
  // Statements whose value a mutated pointer may point to. The caller
  // filters them by pointee type.
  std::span<const StmtIndex> pointer_candidates;
};

// AFL-style interesting values for a primitive, or the declared variants
// for enum-like types.
std::vector<uint64_t> InterestingValues(const PrimitiveType& prim);

absl::StatusOr<Value> GenerateValue(const TypeRegistry& reg, TypeId type, Rng& rng,
                                    int budget, const ValueGenConfig& cfg = {});

// Applies exactly one strategy chosen at random among those valid for the
// value's resolved kind.
MutationOutcome MutateValue(const TypeRegistry& reg, const Value& v, Rng& rng,
                            const MutationInputs& in, const ValueGenConfig& cfg = {});

// Applies a specific top-level strategy. Returns nullopt when it does not
// apply to the value (for example resizing a fixed-length array).
std::optional<MutationOutcome> MutateValueWith(const TypeRegistry& reg, const Value& v,
                                               MutationStrategy strategy, Rng& rng,
                                               const MutationInputs& in,
                                               const ValueGenConfig& cfg = {});

// Strategies applicable to the top level of `v`.
std::vector<MutationStrategy> ApplicableStrategies(const TypeRegistry& reg, const Value& v,
                                                   const MutationInputs& in);

// Number of mutation points inside a value (fields, elements, scalars).
uint64_t MutationPoints(const TypeRegistry& reg, const Value& v);

}  // namespace apifuzz

#endif  // APIFUZZ_VALUE_GEN_H_

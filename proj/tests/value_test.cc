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

#include <algorithm>
#include <string>
#include <vector>

#include "apifuzz/dsl.h"
#include "apifuzz/value.h"
#include "apifuzz/value_gen.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace apifuzz {
namespace {

using apifuzz::testing::FixtureManifest;

std::vector<TypeId> LoadableTypes(const TypeRegistry& reg) {
  std::vector<TypeId> out;
  for (TypeId t = 0; t < reg.size(); ++t) {
    TypeKind k = reg.KindOf(t);
    if (k == TypeKind::kOpaque || k == TypeKind::kVoid) continue;
    if (k == TypeKind::kArray && reg.KindOf(reg.Resolved(t).array().element) == TypeKind::kVoid) continue;
    out.push_back(t);
  }
  return out;
}

bool ContainsRef(const Value& v) {
  bool found = false;
  ForEachRef(v, [&](const LocationRef&) { found = true; });
  return found;
}

TEST(ValueGenTest, PrimitivesStayInSmallRange) {
  TypeRegistry reg;
  TypeId i32 = *reg.Lookup("i32");
  Rng rng(1);
  bool saw_zero = false;
  for (int i = 0; i < 5000; ++i) {
    auto v = GenerateValue(reg, i32, rng, 2);
    ASSERT_TRUE(v.ok());
    int64_t n = NumberAsInt(reg.Resolved(i32).primitive(), std::get<Number>(v->payload));
    EXPECT_GE(n, -256);
    EXPECT_LE(n, 256);
    saw_zero |= n == 0;
  }
  EXPECT_TRUE(saw_zero);
}

TEST(ValueGenTest, RecordLiteralHasEveryField) {
  const Manifest& m = FixtureManifest("cjson");
  TypeId rec = *m.types().Lookup("cJSON");
  Rng rng(7);
  auto v = GenerateValue(m.types(), rec, rng, 3);
  ASSERT_TRUE(v.ok());
  const auto& fl = std::get<FieldList>(v->payload);
  EXPECT_EQ(fl.values.size(), 8u);
  EXPECT_TRUE(fl.values[0].is_null());
  EXPECT_TRUE(CheckValue(m.types(), *v).ok());
}

TEST(ValueGenTest, FixedArrayHasExactLength) {
  const Manifest& m = FixtureManifest("typezoo");
  TypeId arr = *m.types().Lookup("char[7]");
  Rng rng(3);
  for (int budget = 0; budget < 3; ++budget) {
    auto v = GenerateValue(m.types(), arr, rng, budget);
    ASSERT_TRUE(v.ok());
    EXPECT_EQ(ArrayLength(m.types(), *v), 7u);
  }
}

TEST(ValueGenTest, OpaqueTypesCannotBeGenerated) {
  const Manifest& m = FixtureManifest("typezoo");
  Rng rng(3);
  EXPECT_FALSE(GenerateValue(m.types(), *m.types().Lookup("blob"), rng, 2).ok());
}

TEST(ValueGenTest, InterestingValuesFollowTheTable) {
  TypeRegistry reg;
  auto i32 = InterestingValues(reg.Resolved(*reg.Lookup("i32")).primitive());
  for (uint64_t want : {0ull, 1ull, 0xffffffffull, 0x7fffffffull, 0x80000000ull, 0x3fffffffull}) {
    EXPECT_NE(std::find(i32.begin(), i32.end(), want), i32.end()) << want;
  }
  auto u64 = InterestingValues(reg.Resolved(*reg.Lookup("u64")).primitive());
  EXPECT_NE(std::find(u64.begin(), u64.end(), 0x8000000000000000ull), u64.end());
}

TEST(ValueGenTest, EnumInterestingValuesAreItsVariants) {
  const Manifest& m = FixtureManifest("typezoo");
  auto vals = InterestingValues(m.types().Resolved(*m.types().Lookup("color")).primitive());
  EXPECT_EQ(vals, (std::vector<uint64_t>{1, 2, 4}));
}

TEST(ValueMutateTest, InterestingStrategyCanReachIntMin) {
  TypeRegistry reg;
  TypeId i32 = *reg.Lookup("int");
  Value v{i32, NumberFromInt(reg.Resolved(i32).primitive(), 7)};
  Rng rng(11);
  bool hit = false;
  for (int i = 0; i < 200 && !hit; ++i) {
    auto out = MutateValueWith(reg, v, MutationStrategy::kInteresting, rng, {});
    ASSERT_TRUE(out.has_value());
    hit = std::get<Number>(out->value.payload).bits == 0x80000000ull;
  }
  EXPECT_TRUE(hit);
}

TEST(ValueMutateTest, CmpLiteralIsCopied) {
  TypeRegistry reg;
  TypeId i32 = *reg.Lookup("i32");
  Value v{i32, NumberFromInt(reg.Resolved(i32).primitive(), 5)};
  std::vector<uint64_t> cmp = {31337};
  Rng rng(1);
  auto out = MutateValueWith(reg, v, MutationStrategy::kCmpLiteral, rng, {cmp, {}});
  ASSERT_TRUE(out.has_value());
  EXPECT_EQ(std::get<Number>(out->value.payload).bits, 31337u);
}

TEST(ValueMutateTest, PointerNullStrategy) {
  const Manifest& m = FixtureManifest("cjson");
  TypeId p = *m.types().Lookup("cJSON*");
  Value v{p, LocationRef{3, {}, true}};
  Rng rng(1);
  auto out = MutateValueWith(m.types(), v, MutationStrategy::kSetNull, rng, {});
  ASSERT_TRUE(out.has_value());
  EXPECT_TRUE(out->value.is_null());
}

TEST(ValueMutateTest, FreshPointeeRequestsCarryTheirPath) {
  const Manifest& m = FixtureManifest("typezoo");
  TypeId shape = *m.types().Lookup("shape");
  Rng rng(5);
  auto v = GenerateValue(m.types(), shape, rng, 3);
  ASSERT_TRUE(v.ok());
  bool saw = false;
  for (int i = 0; i < 2000 && !saw; ++i) {
    auto out = MutateValue(m.types(), *v, rng, {});
    if (out.request && out.request->kind == MutationRequest::Kind::kFreshArray) {
      EXPECT_EQ(FieldPathToString(out.request->path), "next");
      saw = true;
    }
  }
  EXPECT_TRUE(saw);
}

// Property: for every kind and strategy, mutation keeps the type and
// resize never touches a fixed-length array.
TEST(ValueMutateTest, MutationPreservesTypeAndFixedLengths) {
  for (const char* fixture : {"cjson", "typezoo"}) {
    const Manifest& m = FixtureManifest(fixture);
    const auto& reg = m.types();
    auto types = LoadableTypes(reg);
    Rng rng(1234);
    std::vector<uint64_t> cmp = {7, 0x41414141};
    std::vector<StmtIndex> cands = {0, 2};
    for (int i = 0; i < 10000; ++i) {
      TypeId t = types[rng() % types.size()];
      auto v = GenerateValue(reg, t, rng, 2);
      ASSERT_TRUE(v.ok()) << reg.Get(t).name;
      MutationInputs in{cmp, cands};
      for (auto s : ApplicableStrategies(reg, *v, in)) {
        auto out = MutateValueWith(reg, *v, s, rng, in);
        ASSERT_TRUE(out.has_value());
        EXPECT_EQ(out->value.type, v->type);
        EXPECT_TRUE(CheckValue(reg, out->value).ok())
            << reg.Get(t).name << " " << MutationStrategyName(s);
      }
      const TypeDesc& d = reg.Resolved(t);
      if (d.kind() == TypeKind::kArray && d.array().fixed_len) {
        EXPECT_FALSE(MutateValueWith(reg, *v, MutationStrategy::kResize, rng, in).has_value());
      }
    }
  }
}

TEST(ValueMutateTest, ResizeStaysWithinBound) {
  TypeRegistry reg;
  TypeId vec = reg.ByteVecType();
  Value v{vec, ByteSeq{std::vector<uint8_t>(4090, 1)}};
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    auto out = MutateValueWith(reg, v, MutationStrategy::kResize, rng, {});
    ASSERT_TRUE(out.has_value());
    EXPECT_LE(ArrayLength(reg, out->value), 4096u);
    v = out->value;
  }
}

// Property: generated values validate, carry no references at budget 0 and
// survive a text round trip.
TEST(ValueGenTest, GeneratedValuesRoundTripThroughText) {
  for (const char* fixture : {"cjson", "typezoo"}) {
    const Manifest& m = FixtureManifest(fixture);
    const auto& reg = m.types();
    auto types = LoadableTypes(reg);
    Rng rng(99);
    for (int i = 0; i < 10000; ++i) {
      TypeId t = types[rng() % types.size()];
      int budget = static_cast<int>(rng() % 3);
      auto v = GenerateValue(reg, t, rng, budget);
      ASSERT_TRUE(v.ok());
      ASSERT_TRUE(CheckValue(reg, *v).ok());
      if (budget == 0) {
        EXPECT_FALSE(ContainsRef(*v));
        if (reg.KindOf(t) == TypeKind::kArray && !reg.Resolved(t).array().fixed_len) {
          EXPECT_EQ(ArrayLength(reg, *v), 0u);
        }
      }
      Program p({Statement{0, LoadStmt{t, *v}}});
      std::string text = SerializeProgram(p, reg);
      auto back = ParseProgram(text, reg);
      ASSERT_TRUE(back.ok()) << back.status() << "\n" << text;
      EXPECT_EQ(*back, p) << text;
    }
  }
}

TEST(ValueTest, PathTypeFollowsPointersAndFields) {
  const Manifest& m = FixtureManifest("cjson");
  const auto& reg = m.types();
  FieldPath path{{uint64_t{0}, std::string("child")}};
  auto t = PathType(reg, *reg.Lookup("cJSON*"), path);
  ASSERT_TRUE(t.ok());
  EXPECT_TRUE(reg.Same(*t, *reg.Lookup("cJSON*")));
  EXPECT_FALSE(PathType(reg, *reg.Lookup("cJSON*"), FieldPath{{std::string("child")}}).ok());
}

}  // namespace
}  // namespace apifuzz

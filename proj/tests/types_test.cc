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

#include "apifuzz/types.h"

#include <map>
#include <string>
#include <vector>

#include "apifuzz/manifest.h"
#include "gtest/gtest.h"
#include "json.hpp"
#include "test_util.h"

namespace apifuzz {
namespace {

using nlohmann::json;

TEST(TypeRegistryTest, BuiltinAliasesResolveToPrimitives) {
  TypeRegistry reg;
  auto i = reg.Lookup("int");
  auto i32 = reg.Lookup("i32");
  ASSERT_TRUE(i && i32);
  EXPECT_TRUE(reg.Same(*i, *i32));
  EXPECT_EQ(reg.SizeOf(*i), 4u);
  EXPECT_EQ(reg.SizeOf(*reg.Lookup("size_t")), 8u);
  EXPECT_FALSE(reg.Same(*reg.Lookup("u32"), *i32));
}

TEST(TypeRegistryTest, ConstAndWhitespaceDoNotMatter) {
  EXPECT_EQ(NormalizeTypeSpelling("const char *"), "char*");
  EXPECT_EQ(NormalizeTypeSpelling("const  cJSON * const*"), "cJSON**");
  EXPECT_EQ(NormalizeTypeSpelling("Vec< char >"), "Vec<char>");
}

TEST(TypeRegistryTest, DerivedSpellingsIntern) {
  TypeRegistry reg;
  auto pp = reg.Intern("int**");
  ASSERT_TRUE(pp.ok());
  EXPECT_EQ(reg.KindOf(*pp), TypeKind::kPointer);
  auto arr = reg.Intern("u8[16]");
  ASSERT_TRUE(arr.ok());
  EXPECT_EQ(reg.SizeOf(*arr), 16u);
  EXPECT_FALSE(reg.Intern("u8[x]").ok());
  EXPECT_FALSE(reg.Intern("nosuch*").ok());
}

TEST(TypeRegistryTest, FrozenRegistryRejectsNewSpellings) {
  TypeRegistry reg;
  ASSERT_TRUE(reg.Freeze().ok());
  EXPECT_FALSE(reg.Intern("i16[3]").ok());
  EXPECT_TRUE(reg.Lookup("int*").has_value());
  EXPECT_TRUE(reg.Lookup("Vec<u16>").has_value());
}

TEST(TypeRegistryTest, AliasCycleIsRejected) {
  TypeRegistry reg;
  auto a = reg.Declare("A");
  auto b = reg.Declare("B");
  ASSERT_TRUE(a.ok() && b.ok());
  ASSERT_TRUE(reg.Define(*a, TypeDesc{"A", AliasType{*b}}).ok());
  ASSERT_TRUE(reg.Define(*b, TypeDesc{"B", AliasType{*a}}).ok());
  EXPECT_FALSE(reg.Freeze().ok());
}

TEST(TypeRegistryTest, ByValueRecursionIsRejected) {
  auto m = ParseManifest(R"({"library": "x", "types": [
      {"name": "node", "kind": "record", "fields": [{"name": "self", "type": "node"}]}]})");
  EXPECT_FALSE(m.ok());
}

TEST(TypeRegistryTest, RecursionThroughPointerIsAllowed) {
  auto m = ParseManifest(R"({"library": "x", "types": [
      {"name": "node", "kind": "record", "fields": [{"name": "next", "type": "node*"},
                                                    {"name": "v", "type": "int"}]}]})");
  ASSERT_TRUE(m.ok()) << m.status();
  auto node = m->types().Lookup("node");
  EXPECT_EQ(m->types().SizeOf(*node), 12u);
}

TEST(TypeRegistryTest, DanglingReferenceIsRejected) {
  auto m = ParseManifest(R"({"library": "x", "types": [
      {"name": "p", "kind": "pointer", "pointee": "ghost"}]})");
  ASSERT_FALSE(m.ok());
  EXPECT_NE(m.status().message().find("dangling"), absl::string_view::npos);
}

TEST(TypeRegistryTest, OpaqueAndVoidPointerClassification) {
  auto m = ParseManifest(R"({"library": "x", "types": [
      {"name": "db", "kind": "opaque"},
      {"name": "handle", "kind": "alias", "of": "void*"}],
      "functions": [{"name": "f", "ret": "void", "params": [
        {"name": "a", "type": "db*"}, {"name": "b", "type": "void*"}, {"name": "c", "type": "handle"}]}]})");
  ASSERT_TRUE(m.ok()) << m.status();
  const auto& reg = m->types();
  EXPECT_TRUE(reg.IsOpaquePointer(*reg.Lookup("db*")));
  EXPECT_FALSE(reg.Resolved(*reg.Lookup("db*")).pointer().trivial);
  EXPECT_TRUE(reg.IsBareVoidPointer(*reg.Lookup("void*")));
  EXPECT_FALSE(reg.IsOpaquePointer(*reg.Lookup("void*")));
  EXPECT_TRUE(reg.IsOpaquePointer(*reg.Lookup("handle")));
  EXPECT_FALSE(reg.IsBareVoidPointer(*reg.Lookup("handle")));
}

// Independent layout oracle: records without explicit offsets are packed in
// declaration order, so the size is the plain sum of field sizes.
TEST(TypeRegistryTest, SequentialLayoutMatchesExhaustiveOracle) {
  const std::map<std::string, uint64_t> kSizes = {
      {"i8", 1}, {"u16", 2}, {"int", 4}, {"double", 8}, {"char*", 8}, {"u8[3]", 3}};
  std::vector<std::string> names;
  for (const auto& [n, _] : kSizes) names.push_back(n);
  int checked = 0;
  for (size_t a = 0; a < names.size(); ++a) {
    for (size_t b = 0; b < names.size(); ++b) {
      for (size_t c = 0; c < names.size(); ++c) {
        json doc = {{"library", "x"},
                    {"types", json::array({{{"name", "r"},
                                            {"kind", "record"},
                                            {"fields", json::array({
                                                {{"name", "a"}, {"type", names[a]}},
                                                {{"name", "b"}, {"type", names[b]}},
                                                {{"name", "c"}, {"type", names[c]}},
                                            })}}})}};
        auto m = ParseManifest(doc.dump());
        ASSERT_TRUE(m.ok()) << m.status();
        const auto& reg = m->types();
        TypeId r = *reg.Lookup("r");
        uint64_t want = kSizes.at(names[a]) + kSizes.at(names[b]) + kSizes.at(names[c]);
        EXPECT_EQ(reg.SizeOf(r), want);
        const auto& fields = reg.Resolved(r).record().fields;
        EXPECT_EQ(fields[1].offset, kSizes.at(names[a]));
        EXPECT_EQ(fields[2].offset, kSizes.at(names[a]) + kSizes.at(names[b]));
        ++checked;
      }
    }
  }
  EXPECT_EQ(checked, 216);
}

TEST(TypeRegistryTest, ExplicitOffsetsAndOverlapDetection) {
  auto ok = ParseManifest(R"({"library": "x", "types": [
      {"name": "r", "kind": "record", "size": 16, "fields": [
        {"name": "a", "type": "int", "offset": 0}, {"name": "b", "type": "double", "offset": 8}]}]})");
  ASSERT_TRUE(ok.ok()) << ok.status();
  EXPECT_EQ(ok->types().SizeOf(*ok->types().Lookup("r")), 16u);
  auto bad = ParseManifest(R"({"library": "x", "types": [
      {"name": "r", "kind": "record", "fields": [
        {"name": "a", "type": "int", "offset": 0}, {"name": "b", "type": "double", "offset": 2}]}]})");
  EXPECT_FALSE(bad.ok());
}

TEST(TypeRegistryTest, SameIsStructuralModuloAliases) {
  const Manifest& m = apifuzz::testing::FixtureManifest("cjson");
  const auto& reg = m.types();
  EXPECT_TRUE(reg.Same(*reg.Lookup("const cJSON*"), *reg.Lookup("cJSON*")));
  EXPECT_TRUE(reg.Same(*reg.Lookup("Vec<char>"), *reg.Lookup("Vec<i8>")));
  EXPECT_FALSE(reg.Same(*reg.Lookup("char*"), *reg.Lookup("char**")));
}

TEST(ManifestTest, ProducersIndexReturnTypes) {
  const Manifest& m = apifuzz::testing::FixtureManifest("cjson");
  TypeId cjson_ptr = *m.types().Lookup("cJSON*");
  std::vector<std::string> names;
  for (size_t f : m.ProducersOf(cjson_ptr)) names.push_back(m.functions()[f].name);
  EXPECT_EQ(names, (std::vector<std::string>{"cJSON_ParseWithOpts", "cJSON_AddFalseToObject"}));
}

TEST(ManifestTest, DuplicateFunctionIsRejected) {
  auto m = ParseManifest(R"({"library": "x", "functions": [
      {"name": "f", "ret": "void", "params": []}, {"name": "f", "ret": "int", "params": []}]})");
  EXPECT_FALSE(m.ok());
}

}  // namespace
}  // namespace apifuzz

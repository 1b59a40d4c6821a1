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

// Type vocabulary of a target library: primitives, arrays, records, aliases,
// pointers, function pointers, opaque and void types. Types live in a
// TypeRegistry and are referred to by dense integer ids.
//
// A registry is populated during manifest loading (including any derived
// spellings such as `T*`, `Vec<T>` or `T[N]`) and then frozen. After
// Freeze() every lookup is const and the registry may be shared between
// threads.

#ifndef APIFUZZ_TYPES_H_
#define APIFUZZ_TYPES_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace apifuzz {

using TypeId = uint32_t;
inline constexpr TypeId kNoType = ~TypeId{0};

inline constexpr uint64_t kPointerBytes = 8;

enum class TypeKind {
  kPrimitive,
  kArray,
  kRecord,
  kAlias,
  kPointer,
  kFuncPtr,
  kOpaque,
  kVoid,
};

std::string_view TypeKindName(TypeKind kind);

struct PrimitiveType {
  uint32_t width_bits = 32;
  bool is_signed = true;
  bool is_float = false;
  // Non-empty for enum-like types; the declared variants double as the
  // interesting-value table.
  std::vector<int64_t> variants;
};

struct ArrayType {
  TypeId element = kNoType;
  // Empty for variable-length arrays.
  std::optional<uint64_t> fixed_len;
};

struct RecordField {
  std::string name;
  TypeId type = kNoType;
  uint64_t offset = 0;
};

struct RecordType {
  std::vector<RecordField> fields;
  uint64_t size = 0;
};

struct AliasType {
  TypeId target = kNoType;
};

struct PointerType {
  TypeId pointee = kNoType;
  bool trivial = true;
};

struct FuncPtrType {
  std::vector<TypeId> params;
  TypeId ret = kNoType;
};

struct OpaqueType {};
struct VoidType {};

struct TypeDesc {
  std::string name;
  std::variant<PrimitiveType, ArrayType, RecordType, AliasType, PointerType,
               FuncPtrType, OpaqueType, VoidType>
      detail;

  TypeKind kind() const { return static_cast<TypeKind>(detail.index()); }

  const PrimitiveType& primitive() const {
    return std::get<PrimitiveType>(detail);
  }
  const ArrayType& array() const { return std::get<ArrayType>(detail); }
  const RecordType& record() const { return std::get<RecordType>(detail); }
  const PointerType& pointer() const { return std::get<PointerType>(detail); }
  const FuncPtrType& funcptr() const { return std::get<FuncPtrType>(detail); }
};

struct Param {
  std::string name;
  TypeId type = kNoType;
};

struct FuncSig {
  std::string name;
  std::vector<Param> params;
  TypeId ret = kNoType;
};

class TypeRegistry {
 public:
  // Registers the builtin primitives (i8..u64, f32, f64) and their common C
  // spellings (char, int, long, size_t, ...) as aliases.
  TypeRegistry();

  TypeRegistry(const TypeRegistry&) = default;
  TypeRegistry& operator=(const TypeRegistry&) = default;
  TypeRegistry(TypeRegistry&&) = default;
  TypeRegistry& operator=(TypeRegistry&&) = default;

  // Adds a named type. Fails on duplicate names or after Freeze().
  absl::StatusOr<TypeId> Add(TypeDesc desc);

  // Reserves a name so that later declarations can refer to it before its
  // definition is known (records that point to themselves). Must be followed
  // by Define().
  absl::StatusOr<TypeId> Declare(std::string_view name);
  absl::Status Define(TypeId id, TypeDesc desc);

  // Resolves a spelled type, interning derived types (`T*`, `Vec<T>`,
  // `T[N]`) on the way. Leading `const` qualifiers are dropped. Only valid
  // before Freeze().
  absl::StatusOr<TypeId> Intern(std::string_view spelling);

  // Const lookup of a spelling. Derived spellings resolve only if they were
  // interned before Freeze().
  std::optional<TypeId> Lookup(std::string_view spelling) const;

  // Checks structural invariants (no dangling references, no alias cycles,
  // no by-value recursion, record layouts consistent) and interns the
  // derived types the fuzzer needs at runtime. No further mutation after.
  absl::Status Freeze();
  bool frozen() const { return frozen_; }

  const TypeDesc& Get(TypeId id) const { return types_[id]; }
  size_t size() const { return types_.size(); }

  // Follows aliases to the first non-alias type.
  TypeId Resolve(TypeId id) const;
  const TypeDesc& Resolved(TypeId id) const { return Get(Resolve(id)); }
  TypeKind KindOf(TypeId id) const { return Resolved(id).kind(); }

  // Structural type equality modulo aliases. Records, opaque types and
  // primitives compare by identity of their resolved declaration; pointers
  // and arrays compare component-wise.
  bool Same(TypeId a, TypeId b) const;

  // In-memory size in bytes. Variable-length arrays report their element
  // size times zero; callers size them from the value.
  absl::StatusOr<uint64_t> LayoutSize(TypeId id) const;
  // Like LayoutSize but for types known to be sized.
  uint64_t SizeOf(TypeId id) const;

  bool IsPrimitive(TypeId id) const { return KindOf(id) == TypeKind::kPrimitive; }
  bool IsPointer(TypeId id) const { return KindOf(id) == TypeKind::kPointer; }
  bool IsVoid(TypeId id) const { return KindOf(id) == TypeKind::kVoid; }
  // Pointer whose pointee is opaque (directly or through aliases), or a
  // `void*` spelled through an alias name.
  bool IsOpaquePointer(TypeId id) const;
  // A `void*` reached without any alias; candidates for CAST.
  bool IsBareVoidPointer(TypeId id) const;
  // Pointer to a byte-sized primitive (char*, u8*, ...).
  bool IsStringPointer(TypeId id) const;
  // Arrays whose elements are primitives are stored as raw bytes.
  bool IsPrimitiveArray(TypeId id) const;

  // Derived types. Only valid for spellings interned before Freeze().
  std::optional<TypeId> PointerTo(TypeId id) const;
  std::optional<TypeId> VecOf(TypeId id) const;

  // Canonical spellings of the builtins.
  TypeId CharType() const { return char_; }
  TypeId CharPtrType() const { return char_ptr_; }
  TypeId ByteVecType() const { return byte_vec_; }

 private:
  absl::StatusOr<TypeId> InternDerived(std::string_view spelling);
  absl::StatusOr<TypeId> AddUnchecked(TypeDesc desc);
  absl::Status CheckNoValueCycle(TypeId id, std::vector<int>& state) const;
  absl::StatusOr<uint64_t> LayoutSizeImpl(TypeId id, int depth) const;

  std::vector<TypeDesc> types_;
  std::vector<bool> defined_;
  std::unordered_map<std::string, TypeId> by_name_;
  bool frozen_ = false;
  TypeId char_ = kNoType;
  TypeId char_ptr_ = kNoType;
  TypeId byte_vec_ = kNoType;
};

// Normalizes whitespace and drops `const` so that `const char *` and
// `char*` spell the same type.
std::string NormalizeTypeSpelling(std::string_view spelling);

}  // namespace apifuzz

#endif  // APIFUZZ_TYPES_H_

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

#include <cctype>
#include <charconv>
#include <utility>

#include "absl/strings/str_cat.h"

namespace apifuzz {
namespace {

constexpr int kMaxAliasHops = 64;

bool IsIdentChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

std::string_view TypeKindName(TypeKind kind) {
  switch (kind) {
    case TypeKind::kPrimitive: return "primitive";
    case TypeKind::kArray: return "array";
    case TypeKind::kRecord: return "record";
    case TypeKind::kAlias: return "alias";
    case TypeKind::kPointer: return "pointer";
    case TypeKind::kFuncPtr: return "funcptr";
    case TypeKind::kOpaque: return "opaque";
    case TypeKind::kVoid: return "void";
  }
  return "?";
}

std::string NormalizeTypeSpelling(std::string_view spelling) {
  std::string out;
  out.reserve(spelling.size());
  size_t i = 0;
  while (i < spelling.size()) {
    char c = spelling[i];
    if (IsIdentChar(c)) {
      size_t j = i;
      while (j < spelling.size() && IsIdentChar(spelling[j])) ++j;
      std::string_view word = spelling.substr(i, j - i);
      if (word != "const") out.append(word);
      i = j;
      continue;
    }
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
    ++i;
  }
  return out;
}

TypeRegistry::TypeRegistry() {
  auto prim = [this](std::string name, uint32_t bits, bool is_signed,
                     bool is_float) {
    TypeDesc d{std::move(name), PrimitiveType{bits, is_signed, is_float, {}}};
    return *AddUnchecked(std::move(d));
  };
  auto alias = [this](std::string name, TypeId target) {
    return *AddUnchecked(TypeDesc{std::move(name), AliasType{target}});
  };
  TypeId i8 = prim("i8", 8, true, false);
  TypeId i16 = prim("i16", 16, true, false);
  TypeId i32 = prim("i32", 32, true, false);
  TypeId i64 = prim("i64", 64, true, false);
  TypeId u8 = prim("u8", 8, false, false);
  TypeId u16 = prim("u16", 16, false, false);
  TypeId u32 = prim("u32", 32, false, false);
  TypeId u64 = prim("u64", 64, false, false);
  TypeId f32 = prim("f32", 32, true, true);
  TypeId f64 = prim("f64", 64, true, true);
  *AddUnchecked(TypeDesc{"void", VoidType{}});

  char_ = alias("char", i8);
  alias("bool", u8);
  alias("short", i16);
  alias("int", i32);
  alias("long", i64);
  alias("unsigned", u32);
  alias("size_t", u64);
  alias("float", f32);
  alias("double", f64);
  alias("int8_t", i8);
  alias("int16_t", i16);
  alias("int32_t", i32);
  alias("int64_t", i64);
  alias("uint8_t", u8);
  alias("uint16_t", u16);
  alias("uint32_t", u32);
  alias("uint64_t", u64);
  char_ptr_ = *Intern("char*");
  byte_vec_ = *Intern("Vec<char>");
}

absl::StatusOr<TypeId> TypeRegistry::AddUnchecked(TypeDesc desc) {
  auto id = static_cast<TypeId>(types_.size());
  auto [it, inserted] = by_name_.emplace(desc.name, id);
  if (!inserted) {
    return absl::AlreadyExistsError(absl::StrCat("duplicate type '", desc.name, "'"));
  }
  types_.push_back(std::move(desc));
  defined_.push_back(true);
  return id;
}

absl::StatusOr<TypeId> TypeRegistry::Add(TypeDesc desc) {
  if (frozen_) return absl::FailedPreconditionError("type registry is frozen");
  desc.name = NormalizeTypeSpelling(desc.name);
  if (desc.name.empty()) return absl::InvalidArgumentError("empty type name");
  return AddUnchecked(std::move(desc));
}

absl::StatusOr<TypeId> TypeRegistry::Declare(std::string_view name) {
  if (frozen_) return absl::FailedPreconditionError("type registry is frozen");
  std::string norm = NormalizeTypeSpelling(name);
  if (norm.empty()) return absl::InvalidArgumentError("empty type name");
  auto id = AddUnchecked(TypeDesc{norm, OpaqueType{}});
  if (!id.ok()) return id;
  defined_[*id] = false;
  return id;
}

absl::Status TypeRegistry::Define(TypeId id, TypeDesc desc) {
  if (frozen_) return absl::FailedPreconditionError("type registry is frozen");
  if (id >= types_.size() || defined_[id]) {
    return absl::InvalidArgumentError("Define() on a type that was not declared");
  }
  desc.name = types_[id].name;
  types_[id] = std::move(desc);
  defined_[id] = true;
  return absl::OkStatus();
}

absl::StatusOr<TypeId> TypeRegistry::Intern(std::string_view spelling) {
  std::string norm = NormalizeTypeSpelling(spelling);
  if (auto it = by_name_.find(norm); it != by_name_.end()) return it->second;
  if (frozen_) {
    return absl::NotFoundError(absl::StrCat("unknown type '", norm, "'"));
  }
  return InternDerived(norm);
}

absl::StatusOr<TypeId> TypeRegistry::InternDerived(std::string_view norm) {
  if (norm.empty()) return absl::InvalidArgumentError("empty type spelling");
  if (norm.back() == '*') {
    auto pointee = Intern(norm.substr(0, norm.size() - 1));
    if (!pointee.ok()) return pointee.status();
    return AddUnchecked(TypeDesc{std::string(norm), PointerType{*pointee, true}});
  }
  if (norm.starts_with("Vec<") && norm.back() == '>') {
    auto elem = Intern(norm.substr(4, norm.size() - 5));
    if (!elem.ok()) return elem.status();
    return AddUnchecked(TypeDesc{std::string(norm), ArrayType{*elem, std::nullopt}});
  }
  if (norm.back() == ']') {
    size_t open = norm.rfind('[');
    if (open == std::string_view::npos || open == 0) {
      return absl::InvalidArgumentError(absl::StrCat("malformed array type '", std::string(norm), "'"));
    }
    std::string_view digits = norm.substr(open + 1, norm.size() - open - 2);
    uint64_t len = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), len);
    if (ec != std::errc() || p != digits.data() + digits.size()) {
      return absl::InvalidArgumentError(absl::StrCat("malformed array length in '", std::string(norm), "'"));
    }
    auto elem = Intern(norm.substr(0, open));
    if (!elem.ok()) return elem.status();
    return AddUnchecked(TypeDesc{std::string(norm), ArrayType{*elem, len}});
  }
  return absl::NotFoundError(absl::StrCat("unknown type '", std::string(norm), "'"));
}

std::optional<TypeId> TypeRegistry::Lookup(std::string_view spelling) const {
  auto it = by_name_.find(NormalizeTypeSpelling(spelling));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

TypeId TypeRegistry::Resolve(TypeId id) const {
  for (int hops = 0; hops < kMaxAliasHops; ++hops) {
    const TypeDesc& d = types_[id];
    if (d.kind() != TypeKind::kAlias) return id;
    id = std::get<AliasType>(d.detail).target;
  }
  return id;
}

bool TypeRegistry::Same(TypeId a, TypeId b) const {
  TypeId ra = Resolve(a);
  TypeId rb = Resolve(b);
  if (ra == rb) return true;
  const TypeDesc& da = types_[ra];
  const TypeDesc& db = types_[rb];
  if (da.kind() != db.kind()) return false;
  switch (da.kind()) {
    case TypeKind::kPointer:
      return Same(da.pointer().pointee, db.pointer().pointee);
    case TypeKind::kArray:
      return da.array().fixed_len == db.array().fixed_len &&
             Same(da.array().element, db.array().element);
    case TypeKind::kFuncPtr: {
      const auto& fa = da.funcptr();
      const auto& fb = db.funcptr();
      if (fa.params.size() != fb.params.size() || !Same(fa.ret, fb.ret)) return false;
      for (size_t i = 0; i < fa.params.size(); ++i) {
        if (!Same(fa.params[i], fb.params[i])) return false;
      }
      return true;
    }
    case TypeKind::kVoid:
      return true;
    default:
      return false;
  }
}

absl::StatusOr<uint64_t> TypeRegistry::LayoutSize(TypeId id) const {
  if (id >= types_.size()) return absl::InvalidArgumentError("unknown type id");
  return LayoutSizeImpl(id, 0);
}

absl::StatusOr<uint64_t> TypeRegistry::LayoutSizeImpl(TypeId id, int depth) const {
  if (depth > kMaxAliasHops) return absl::InvalidArgumentError("type nesting too deep");
  const TypeDesc& d = Resolved(id);
  switch (d.kind()) {
    case TypeKind::kPrimitive:
      return uint64_t{d.primitive().width_bits / 8};
    case TypeKind::kArray: {
      if (!d.array().fixed_len) {
        return absl::InvalidArgumentError(
            absl::StrCat("'", d.name, "' is variable-length; size comes from its value"));
      }
      auto elem = LayoutSizeImpl(d.array().element, depth + 1);
      if (!elem.ok()) return elem;
      return *elem * *d.array().fixed_len;
    }
    case TypeKind::kRecord:
      return d.record().size;
    case TypeKind::kPointer:
    case TypeKind::kFuncPtr:
      return kPointerBytes;
    case TypeKind::kOpaque:
    case TypeKind::kVoid:
      return absl::InvalidArgumentError(absl::StrCat("'", d.name, "' has no size"));
    case TypeKind::kAlias:
      break;
  }
  return absl::InternalError("unresolved alias");
}

uint64_t TypeRegistry::SizeOf(TypeId id) const {
  auto size = LayoutSize(id);
  return size.ok() ? *size : 0;
}

bool TypeRegistry::IsOpaquePointer(TypeId id) const {
  const TypeDesc& d = Resolved(id);
  if (d.kind() != TypeKind::kPointer) return false;
  TypeKind pointee = KindOf(d.pointer().pointee);
  if (pointee == TypeKind::kOpaque) return true;
  return pointee == TypeKind::kVoid && !IsBareVoidPointer(id);
}

bool TypeRegistry::IsBareVoidPointer(TypeId id) const {
  const TypeDesc& d = types_[id];
  if (d.kind() != TypeKind::kPointer || !d.name.ends_with('*')) return false;
  return types_[d.pointer().pointee].kind() == TypeKind::kVoid;
}

bool TypeRegistry::IsStringPointer(TypeId id) const {
  const TypeDesc& d = Resolved(id);
  if (d.kind() != TypeKind::kPointer) return false;
  const TypeDesc& p = Resolved(d.pointer().pointee);
  return p.kind() == TypeKind::kPrimitive && p.primitive().width_bits == 8 &&
         !p.primitive().is_float;
}

bool TypeRegistry::IsPrimitiveArray(TypeId id) const {
  const TypeDesc& d = Resolved(id);
  return d.kind() == TypeKind::kArray && IsPrimitive(d.array().element);
}

std::optional<TypeId> TypeRegistry::PointerTo(TypeId id) const {
  return Lookup(types_[id].name + "*");
}

std::optional<TypeId> TypeRegistry::VecOf(TypeId id) const {
  return Lookup(absl::StrCat("Vec<", types_[id].name, ">"));
}

absl::Status TypeRegistry::CheckNoValueCycle(TypeId id, std::vector<int>& state) const {
  // 0 = unvisited, 1 = on stack, 2 = done.
  if (state[id] == 2) return absl::OkStatus();
  if (state[id] == 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("type '", types_[id].name, "' contains itself by value"));
  }
  state[id] = 1;
  const TypeDesc& d = types_[id];
  absl::Status st;
  switch (d.kind()) {
    case TypeKind::kAlias:
      st = CheckNoValueCycle(std::get<AliasType>(d.detail).target, state);
      break;
    case TypeKind::kArray:
      st = CheckNoValueCycle(d.array().element, state);
      break;
    case TypeKind::kRecord:
      for (const auto& f : d.record().fields) {
        st = CheckNoValueCycle(f.type, state);
        if (!st.ok()) break;
      }
      break;
    default:
      break;
  }
  state[id] = 2;
  return st;
}

absl::Status TypeRegistry::Freeze() {
  if (frozen_) return absl::OkStatus();
  auto valid = [this](TypeId t) { return t < types_.size(); };
  for (TypeId id = 0; id < types_.size(); ++id) {
    const TypeDesc& d = types_[id];
    if (!defined_[id]) {
      return absl::InvalidArgumentError(absl::StrCat("type '", d.name, "' declared but never defined"));
    }
    bool ok = true;
    switch (d.kind()) {
      case TypeKind::kAlias: ok = valid(std::get<AliasType>(d.detail).target); break;
      case TypeKind::kArray: ok = valid(d.array().element); break;
      case TypeKind::kPointer: ok = valid(d.pointer().pointee); break;
      case TypeKind::kRecord:
        for (const auto& f : d.record().fields) ok = ok && valid(f.type);
        break;
      case TypeKind::kFuncPtr:
        ok = valid(d.funcptr().ret);
        for (TypeId p : d.funcptr().params) ok = ok && valid(p);
        break;
      default: break;
    }
    if (!ok) return absl::InvalidArgumentError(absl::StrCat("type '", d.name, "' has a dangling reference"));
  }
  for (TypeId id = 0; id < types_.size(); ++id) {
    TypeId t = id;
    int hops = 0;
    while (types_[t].kind() == TypeKind::kAlias) {
      if (++hops > kMaxAliasHops) {
        return absl::InvalidArgumentError(
            absl::StrCat("alias cycle through '", types_[id].name, "'"));
      }
      t = std::get<AliasType>(types_[t].detail).target;
    }
  }
  std::vector<int> state(types_.size(), 0);
  for (TypeId id = 0; id < types_.size(); ++id) {
    if (auto st = CheckNoValueCycle(id, state); !st.ok()) return st;
  }
  for (TypeId id = 0; id < types_.size(); ++id) {
    const TypeDesc& d = types_[id];
    if (d.kind() != TypeKind::kRecord) continue;
    uint64_t end = 0;
    for (const auto& f : d.record().fields) {
      if (KindOf(f.type) == TypeKind::kOpaque || KindOf(f.type) == TypeKind::kVoid) {
        return absl::InvalidArgumentError(
            absl::StrCat("field '", f.name, "' of '", d.name, "' has no size"));
      }
      auto size = LayoutSize(f.type);
      if (!size.ok()) {
        return absl::InvalidArgumentError(absl::StrCat("field '", f.name, "' of '", d.name,
                                                       "': ", size.status().message()));
      }
      if (f.offset < end) {
        return absl::InvalidArgumentError(
            absl::StrCat("field '", f.name, "' of '", d.name, "' overlaps its predecessor"));
      }
      end = f.offset + *size;
    }
    if (d.record().size < end) {
      return absl::InvalidArgumentError(
          absl::StrCat("record '", d.name, "' is smaller than its fields"));
    }
  }
  // The generator needs `T*` for address-of loads and `Vec<T>` for fresh
  // pointee arrays.
  size_t n = types_.size();
  for (TypeId id = 0; id < n; ++id) {
    TypeKind k = KindOf(id);
    if (k == TypeKind::kVoid && types_[id].name != "void") continue;
    if (k == TypeKind::kPrimitive || k == TypeKind::kRecord || k == TypeKind::kPointer) {
      if (auto st = Intern(types_[id].name + "*"); !st.ok()) return st.status();
      if (auto st = Intern(absl::StrCat("Vec<", types_[id].name, ">")); !st.ok()) return st.status();
    }
  }
  // Derived pointers spelled `T*` are trivial unless T hides its layout.
  for (auto& d : types_) {
    if (d.kind() != TypeKind::kPointer || !d.name.ends_with('*')) continue;
    auto& p = std::get<PointerType>(d.detail);
    TypeKind k = KindOf(p.pointee);
    p.trivial = k != TypeKind::kOpaque && k != TypeKind::kVoid && k != TypeKind::kFuncPtr;
  }
  frozen_ = true;
  return absl::OkStatus();
}

}  // namespace apifuzz

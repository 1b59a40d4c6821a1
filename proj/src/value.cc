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

#include "apifuzz/value.h"

#include <bit>
#include <cmath>
#include <cstring>

#include "absl/strings/str_cat.h"

namespace apifuzz {

bool ElementList::operator==(const ElementList& o) const { return items == o.items; }
bool FieldList::operator==(const FieldList& o) const { return values == o.values; }
bool Value::operator==(const Value& o) const {
  return type == o.type && payload == o.payload;
}

uint64_t WidthMask(uint32_t width_bits) {
  return width_bits >= 64 ? ~uint64_t{0} : ((uint64_t{1} << width_bits) - 1);
}

int64_t SignExtend(uint64_t bits, uint32_t width_bits) {
  if (width_bits >= 64) return static_cast<int64_t>(bits);
  uint64_t sign = uint64_t{1} << (width_bits - 1);
  bits &= WidthMask(width_bits);
  return static_cast<int64_t>((bits ^ sign) - sign);
}

Number NumberFromInt(const PrimitiveType& prim, int64_t v) {
  if (prim.is_float) return NumberFromDouble(prim, static_cast<double>(v));
  return Number{static_cast<uint64_t>(v) & WidthMask(prim.width_bits)};
}

Number NumberFromDouble(const PrimitiveType& prim, double v) {
  if (!prim.is_float) return NumberFromInt(prim, static_cast<int64_t>(v));
  if (prim.width_bits == 32) {
    return Number{std::bit_cast<uint32_t>(static_cast<float>(v))};
  }
  return Number{std::bit_cast<uint64_t>(v)};
}

double NumberAsDouble(const PrimitiveType& prim, Number n) {
  if (prim.is_float) {
    if (prim.width_bits == 32) {
      return std::bit_cast<float>(static_cast<uint32_t>(n.bits));
    }
    return std::bit_cast<double>(n.bits);
  }
  return static_cast<double>(NumberAsInt(prim, n));
}

int64_t NumberAsInt(const PrimitiveType& prim, Number n) {
  if (prim.is_float) {
    double d = NumberAsDouble(prim, n);
    if (!std::isfinite(d)) return 0;
    if (d >= 9.2e18) return INT64_MAX;
    if (d <= -9.2e18) return INT64_MIN;
    return static_cast<int64_t>(d);
  }
  if (prim.is_signed) return SignExtend(n.bits, prim.width_bits);
  return static_cast<int64_t>(n.bits & WidthMask(prim.width_bits));
}

uint64_t ArrayLength(const TypeRegistry& reg, const Value& v) {
  if (const auto* bs = std::get_if<ByteSeq>(&v.payload)) {
    const TypeDesc& d = reg.Resolved(v.type);
    uint64_t elem = d.kind() == TypeKind::kArray ? reg.SizeOf(d.array().element) : 1;
    return elem == 0 ? 0 : bs->bytes.size() / elem;
  }
  if (const auto* el = std::get_if<ElementList>(&v.payload)) return el->items.size();
  return 0;
}

uint64_t ValueByteSize(const TypeRegistry& reg, const Value& v) {
  const TypeDesc& d = reg.Resolved(v.type);
  if (d.kind() == TypeKind::kArray && !d.array().fixed_len) {
    if (const auto* bs = std::get_if<ByteSeq>(&v.payload)) return bs->bytes.size();
    return ArrayLength(reg, v) * reg.SizeOf(d.array().element);
  }
  return reg.SizeOf(v.type);
}

absl::Status CheckValue(const TypeRegistry& reg, const Value& v) {
  if (v.type >= reg.size()) return absl::InvalidArgumentError("value has an unknown type");
  const TypeDesc& d = reg.Resolved(v.type);
  auto mismatch = [&](std::string_view what) {
    return absl::InvalidArgumentError(
        absl::StrCat("value of type '", reg.Get(v.type).name, "' cannot be ", std::string(what)));
  };
  // A copy `<i>` may stand for a value of any type.
  if (const auto* ref = std::get_if<LocationRef>(&v.payload)) {
    if (ref->address_of && d.kind() != TypeKind::kPointer) return mismatch("an address");
    return absl::OkStatus();
  }
  switch (d.kind()) {
    case TypeKind::kPrimitive:
      if (!std::holds_alternative<Number>(v.payload)) return mismatch("a non-number");
      return absl::OkStatus();
    case TypeKind::kArray: {
      const auto& arr = d.array();
      if (reg.IsPrimitive(arr.element)) {
        const auto* bs = std::get_if<ByteSeq>(&v.payload);
        if (bs == nullptr) return mismatch("a non-byte sequence");
        uint64_t elem = reg.SizeOf(arr.element);
        if (elem == 0 || bs->bytes.size() % elem != 0) return mismatch("a ragged byte sequence");
        if (arr.fixed_len && bs->bytes.size() != *arr.fixed_len * elem) {
          return mismatch(absl::StrCat("of length ", bs->bytes.size() / elem));
        }
        return absl::OkStatus();
      }
      const auto* el = std::get_if<ElementList>(&v.payload);
      if (el == nullptr) return mismatch("a non-list");
      if (arr.fixed_len && el->items.size() != *arr.fixed_len) {
        return mismatch(absl::StrCat("of length ", el->items.size()));
      }
      for (const auto& item : el->items) {
        if (!reg.Same(item.type, arr.element)) return mismatch("holding mistyped elements");
        if (auto st = CheckValue(reg, item); !st.ok()) return st;
      }
      return absl::OkStatus();
    }
    case TypeKind::kRecord: {
      const auto* fl = std::get_if<FieldList>(&v.payload);
      if (fl == nullptr) return mismatch("a non-record");
      const auto& fields = d.record().fields;
      if (fl->values.size() != fields.size()) return mismatch("missing fields");
      for (size_t i = 0; i < fields.size(); ++i) {
        if (!reg.Same(fl->values[i].type, fields[i].type)) {
          return mismatch(absl::StrCat("with mistyped field '", fields[i].name, "'"));
        }
        if (auto st = CheckValue(reg, fl->values[i]); !st.ok()) return st;
      }
      return absl::OkStatus();
    }
    case TypeKind::kPointer:
      if (!v.is_null()) return mismatch("a non-pointer literal");
      return absl::OkStatus();
    case TypeKind::kFuncPtr:
      if (!v.is_null() && !std::holds_alternative<StubHandle>(v.payload)) {
        return mismatch("a non-function literal");
      }
      return absl::OkStatus();
    case TypeKind::kOpaque:
    case TypeKind::kVoid:
      return mismatch("materialized");
    case TypeKind::kAlias:
      break;
  }
  return absl::InternalError("unresolved alias");
}

absl::StatusOr<TypeId> PathType(const TypeRegistry& reg, TypeId type, const FieldPath& path) {
  TypeId cur = type;
  for (const auto& seg : path.segments) {
    const TypeDesc& d = reg.Resolved(cur);
    if (const auto* idx = std::get_if<uint64_t>(&seg)) {
      if (d.kind() == TypeKind::kArray) {
        if (d.array().fixed_len && *idx >= *d.array().fixed_len) {
          return absl::OutOfRangeError(absl::StrCat("index ", *idx, " outside '", d.name, "'"));
        }
        cur = d.array().element;
      } else if (d.kind() == TypeKind::kPointer) {
        TypeKind pk = reg.KindOf(d.pointer().pointee);
        if (pk == TypeKind::kOpaque || pk == TypeKind::kVoid) {
          return absl::InvalidArgumentError(absl::StrCat("cannot index through '", d.name, "'"));
        }
        cur = d.pointer().pointee;
      } else {
        return absl::InvalidArgumentError(absl::StrCat("cannot index into '", d.name, "'"));
      }
      continue;
    }
    const auto& name = std::get<std::string>(seg);
    if (d.kind() != TypeKind::kRecord) {
      return absl::InvalidArgumentError(absl::StrCat("'", d.name, "' has no field '", name, "'"));
    }
    bool found = false;
    for (const auto& f : d.record().fields) {
      if (f.name == name) {
        cur = f.type;
        found = true;
        break;
      }
    }
    if (!found) {
      return absl::InvalidArgumentError(absl::StrCat("'", d.name, "' has no field '", name, "'"));
    }
  }
  return cur;
}

namespace {

template <typename V>
V* ValueAtImpl(V& v, const TypeRegistry& reg, const FieldPath& path) {
  V* cur = &v;
  for (const auto& seg : path.segments) {
    const TypeDesc& d = reg.Resolved(cur->type);
    if (const auto* idx = std::get_if<uint64_t>(&seg)) {
      if (d.kind() != TypeKind::kArray) return nullptr;
      auto* el = std::get_if<ElementList>(&cur->payload);
      if (el == nullptr || *idx >= el->items.size()) return nullptr;
      cur = &el->items[*idx];
      continue;
    }
    if (d.kind() != TypeKind::kRecord) return nullptr;
    auto* fl = std::get_if<FieldList>(&cur->payload);
    if (fl == nullptr) return nullptr;
    const auto& fields = d.record().fields;
    const auto& name = std::get<std::string>(seg);
    size_t i = 0;
    while (i < fields.size() && fields[i].name != name) ++i;
    if (i == fields.size() || i >= fl->values.size()) return nullptr;
    cur = &fl->values[i];
  }
  return cur;
}

}  // namespace

const Value* ValueAt(const Value& v, const TypeRegistry& reg, const FieldPath& path) {
  return ValueAtImpl(v, reg, path);
}

Value* MutableValueAt(Value& v, const TypeRegistry& reg, const FieldPath& path) {
  return ValueAtImpl(v, reg, path);
}

std::string FieldPathToString(const FieldPath& path) {
  std::string out;
  for (size_t i = 0; i < path.segments.size(); ++i) {
    if (i > 0) out.push_back('.');
    if (const auto* idx = std::get_if<uint64_t>(&path.segments[i])) {
      absl::StrAppend(&out, *idx);
    } else {
      out.append(std::get<std::string>(path.segments[i]));
    }
  }
  return out;
}

}  // namespace apifuzz

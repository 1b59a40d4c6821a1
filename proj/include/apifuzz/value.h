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

// Typed literal values carried by load statements.

#ifndef APIFUZZ_VALUE_H_
#define APIFUZZ_VALUE_H_

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "apifuzz/types.h"

namespace apifuzz {

using StmtIndex = uint32_t;

// One step of a path into a value: an array element (or, on a pointer, the
// n-th pointee) or a record field.
using PathSegment = std::variant<uint64_t, std::string>;

struct FieldPath {
  std::vector<PathSegment> segments;

  bool empty() const { return segments.empty(); }
  size_t size() const { return segments.size(); }
  bool operator==(const FieldPath&) const = default;
};

// Raw bits of a primitive, truncated to its width. Integers are stored in
// two's complement, floats as their IEEE-754 bit pattern.
struct Number {
  uint64_t bits = 0;
  bool operator==(const Number&) const = default;
};

// Memory image (little endian) of an array whose elements are primitives.
struct ByteSeq {
  std::vector<uint8_t> bytes;
  bool operator==(const ByteSeq&) const = default;
};

struct Value;

// Elements of an array of non-primitive elements.
struct ElementList {
  std::vector<Value> items;
  bool operator==(const ElementList&) const;
};

// Record fields in declaration order.
struct FieldList {
  std::vector<Value> values;
  bool operator==(const FieldList&) const;
};

struct NullValue {
  bool operator==(const NullValue&) const = default;
};

// `&<i>[path]` takes the address of a place inside statement i;
// `<i>[path]` copies the value stored there.
struct LocationRef {
  StmtIndex index = 0;
  FieldPath path;
  bool address_of = true;
  bool operator==(const LocationRef&) const = default;
};

// Handle to a synthesized function-pointer stub.
struct StubHandle {
  bool operator==(const StubHandle&) const = default;
};

struct Value {
  TypeId type = kNoType;
  std::variant<Number, ByteSeq, ElementList, FieldList, NullValue, LocationRef, StubHandle>
      payload;

  bool is_null() const { return std::holds_alternative<NullValue>(payload); }
  bool is_ref() const { return std::holds_alternative<LocationRef>(payload); }
  bool operator==(const Value&) const;
};

// Primitive helpers.
int64_t SignExtend(uint64_t bits, uint32_t width_bits);
uint64_t WidthMask(uint32_t width_bits);
Number NumberFromInt(const PrimitiveType& prim, int64_t v);
Number NumberFromDouble(const PrimitiveType& prim, double v);
// Integer view of a number; floats are truncated.
int64_t NumberAsInt(const PrimitiveType& prim, Number n);
double NumberAsDouble(const PrimitiveType& prim, Number n);

// Element count of an array value (bytes / element size for primitive
// arrays).
uint64_t ArrayLength(const TypeRegistry& reg, const Value& v);

// Serialized size of a value when materialized in memory.
uint64_t ValueByteSize(const TypeRegistry& reg, const Value& v);

// Checks that the payload matches the resolved type kind, recursively.
// Location refs are only checked for their shape (not the referenced type).
absl::Status CheckValue(const TypeRegistry& reg, const Value& v);

// Calls `fn` on every location ref nested inside `v`.
template <typename Fn>
void ForEachRef(const Value& v, Fn&& fn) {
  if (const auto* ref = std::get_if<LocationRef>(&v.payload)) {
    fn(*ref);
  } else if (const auto* el = std::get_if<ElementList>(&v.payload)) {
    for (const auto& item : el->items) ForEachRef(item, fn);
  } else if (const auto* fl = std::get_if<FieldList>(&v.payload)) {
    for (const auto& item : fl->values) ForEachRef(item, fn);
  }
}

template <typename Fn>
void ForEachRefMutable(Value& v, Fn&& fn) {
  if (auto* ref = std::get_if<LocationRef>(&v.payload)) {
    fn(*ref);
  } else if (auto* el = std::get_if<ElementList>(&v.payload)) {
    for (auto& item : el->items) ForEachRefMutable(item, fn);
  } else if (auto* fl = std::get_if<FieldList>(&v.payload)) {
    for (auto& item : fl->values) ForEachRefMutable(item, fn);
  }
}

// Type of the place that `path` designates inside a value of type `type`.
// Indexing a pointer designates its n-th pointee.
absl::StatusOr<TypeId> PathType(const TypeRegistry& reg, TypeId type, const FieldPath& path);

// Sub-value at `path` for paths that stay inside the literal (no pointer
// dereference). Returns nullptr when the path leaves the value.
const Value* ValueAt(const Value& v, const TypeRegistry& reg, const FieldPath& path);
Value* MutableValueAt(Value& v, const TypeRegistry& reg, const FieldPath& path);

std::string FieldPathToString(const FieldPath& path);

}  // namespace apifuzz

#endif  // APIFUZZ_VALUE_H_

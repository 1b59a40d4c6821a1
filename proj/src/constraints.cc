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
#include <set>

#include "absl/strings/str_cat.h"
#include "apifuzz/constraints.h"

namespace apifuzz {
namespace {

// A place inside the literal of a load statement.
struct Place {
  size_t pos = 0;
  FieldPath path;
};

FieldPath Extend(const FieldPath& p, PathSegment seg) {
  FieldPath out = p;
  out.segments.push_back(std::move(seg));
  return out;
}

Locator Child(const Locator& l, PathSegment seg) { return Locator{l.arg, Extend(l.path, std::move(seg))}; }

const Value* ValueOf(const Program& p, const Place& pl, const TypeRegistry& reg) {
  if (pl.pos >= p.size() || !p[pl.pos].is_load()) return nullptr;
  return ValueAt(p[pl.pos].load().value, reg, pl.path);
}

Value* MutableValueOf(Program& p, const Place& pl, const TypeRegistry& reg) {
  if (pl.pos >= p.size() || !p[pl.pos].is_load()) return nullptr;
  return MutableValueAt(p[pl.pos].load().value, reg, pl.path);
}

// Place a pointer stored at `pl` designates, following copied pointers.
std::optional<Place> Deref(const Program& p, Place pl, const TypeRegistry& reg) {
  for (int hop = 0; hop < 8; ++hop) {
    const Value* v = ValueOf(p, pl, reg);
    if (v == nullptr) return std::nullopt;
    const auto* ref = std::get_if<LocationRef>(&v->payload);
    if (ref == nullptr) return std::nullopt;
    auto pos = p.PositionOf(ref->index);
    if (!pos || !p[*pos].is_load()) return std::nullopt;
    if (ref->address_of) return Place{*pos, ref->path};
    pl = Place{*pos, ref->path};
  }
  return std::nullopt;
}

bool IsArrayValue(const Value* v, const TypeRegistry& reg) {
  return v != nullptr && reg.KindOf(v->type) == TypeKind::kArray;
}

// An array a pointer addresses into, with the element the pointer starts at.
struct ArrayView {
  Place array;
  uint64_t offset = 0;
  uint64_t length = 0;  // elements from offset on
};

std::optional<ArrayView> PointedArray(const Program& p, const Place& ptr, const TypeRegistry& reg) {
  auto target = Deref(p, ptr, reg);
  if (!target) return std::nullopt;
  if (!target->path.empty()) {
    if (const auto* idx = std::get_if<uint64_t>(&target->path.segments.back())) {
      Place parent{target->pos, target->path};
      parent.path.segments.pop_back();
      const Value* pv = ValueOf(p, parent, reg);
      if (IsArrayValue(pv, reg)) {
        uint64_t len = ArrayLength(reg, *pv);
        return ArrayView{parent, *idx, len > *idx ? len - *idx : 0};
      }
    }
  }
  const Value* tv = ValueOf(p, *target, reg);
  if (!IsArrayValue(tv, reg)) return std::nullopt;
  return ArrayView{*target, 0, ArrayLength(reg, *tv)};
}

// The n-th pointee of the pointer at `ptr`.
std::optional<Place> Pointee(const Program& p, const Place& ptr, uint64_t n, const TypeRegistry& reg) {
  if (auto view = PointedArray(p, ptr, reg)) {
    return Place{view->array.pos, Extend(view->array.path, view->offset + n)};
  }
  auto target = Deref(p, ptr, reg);
  if (!target || n != 0) return std::nullopt;
  return target;
}

const CallStmt* CallAt(const Program& p, size_t pos) {
  return pos < p.size() && p[pos].is_call() ? &p[pos].call() : nullptr;
}

// Position of the statement feeding argument `arg` of the call at `call_pos`.
std::optional<size_t> ArgPosition(const Program& p, size_t call_pos, uint32_t arg) {
  const CallStmt* call = CallAt(p, call_pos);
  if (call == nullptr || arg >= call->args.size()) return std::nullopt;
  return p.PositionOf(call->args[arg]);
}

std::optional<Place> ResolvePlace(const Program& p, size_t call_pos, const Locator& l,
                                  const Manifest& m) {
  const TypeRegistry& reg = m.types();
  const CallStmt* call = CallAt(p, call_pos);
  if (call == nullptr) return std::nullopt;
  const FuncSig* sig = m.FindFunction(call->name);
  if (sig == nullptr || l.arg >= sig->params.size()) return std::nullopt;
  auto pos = ArgPosition(p, call_pos, l.arg);
  if (!pos || !p[*pos].is_load()) return std::nullopt;
  Place cur{*pos, {}};
  TypeId t = sig->params[l.arg].type;
  for (const auto& seg : l.path.segments) {
    const TypeDesc& d = reg.Resolved(t);
    switch (d.kind()) {
      case TypeKind::kPointer: {
        const auto* n = std::get_if<uint64_t>(&seg);
        if (n == nullptr) return std::nullopt;
        auto next = Pointee(p, cur, *n, reg);
        if (!next) return std::nullopt;
        cur = *next;
        t = d.pointer().pointee;
        break;
      }
      case TypeKind::kRecord: {
        const auto* name = std::get_if<std::string>(&seg);
        if (name == nullptr) return std::nullopt;
        auto f = std::find_if(d.record().fields.begin(), d.record().fields.end(),
                              [&](const RecordField& rf) { return rf.name == *name; });
        if (f == d.record().fields.end()) return std::nullopt;
        cur.path = Extend(cur.path, seg);
        t = f->type;
        break;
      }
      case TypeKind::kArray:
        if (!std::holds_alternative<uint64_t>(seg)) return std::nullopt;
        cur.path = Extend(cur.path, seg);
        t = d.array().element;
        break;
      default:
        return std::nullopt;
    }
  }
  return cur;
}

void WalkSlots(const Program& p, const TypeRegistry& reg, const std::optional<Place>& place,
               TypeId type, const Locator& loc, std::vector<std::pair<Locator, TypeId>>& out) {
  out.emplace_back(loc, type);
  if (!place || loc.path.size() >= kMaxLocatorDepth) return;
  const TypeDesc& d = reg.Resolved(type);
  switch (d.kind()) {
    case TypeKind::kPointer: {
      TypeKind pk = reg.KindOf(d.pointer().pointee);
      if (pk != TypeKind::kRecord && pk != TypeKind::kPointer) return;
      WalkSlots(p, reg, Pointee(p, *place, 0, reg), d.pointer().pointee, Child(loc, uint64_t{0}),
                out);
      return;
    }
    case TypeKind::kRecord:
      for (const auto& f : d.record().fields) {
        Place sub{place->pos, Extend(place->path, f.name)};
        WalkSlots(p, reg, sub, f.type, Child(loc, f.name), out);
      }
      return;
    case TypeKind::kArray: {
      if (reg.IsPrimitive(d.array().element)) return;
      const Value* v = ValueOf(p, *place, reg);
      if (v == nullptr) return;
      uint64_t n = std::min<uint64_t>(ArrayLength(reg, *v), 8);
      for (uint64_t i = 0; i < n; ++i) {
        Place sub{place->pos, Extend(place->path, i)};
        WalkSlots(p, reg, sub, d.array().element, Child(loc, i), out);
      }
      return;
    }
    default:
      return;
  }
}

bool IsIntegerType(const TypeRegistry& reg, TypeId t) {
  return reg.IsPrimitive(t) && !reg.Resolved(t).primitive().is_float;
}

std::optional<int64_t> NumberAt(const Program& p, const Place& pl, const TypeRegistry& reg) {
  const Value* v = ValueOf(p, pl, reg);
  if (v == nullptr || !IsIntegerType(reg, v->type)) return std::nullopt;
  const auto* n = std::get_if<Number>(&v->payload);
  if (n == nullptr) return std::nullopt;
  return NumberAsInt(reg.Resolved(v->type).primitive(), *n);
}

bool FitsType(const PrimitiveType& prim, int64_t v) {
  if (prim.width_bits >= 64) return prim.is_signed || v >= 0;
  int64_t lo = prim.is_signed ? -(int64_t{1} << (prim.width_bits - 1)) : 0;
  int64_t hi = prim.is_signed ? (int64_t{1} << (prim.width_bits - 1)) - 1
                              : static_cast<int64_t>((uint64_t{1} << prim.width_bits) - 1);
  return v >= lo && v <= hi;
}

bool SetNumber(Program& p, const Place& pl, const TypeRegistry& reg, int64_t v) {
  Value* val = MutableValueOf(p, pl, reg);
  if (val == nullptr || !IsIntegerType(reg, val->type)) return false;
  val->payload = NumberFromInt(reg.Resolved(val->type).primitive(), v);
  return true;
}

bool IsByteElement(const TypeRegistry& reg, TypeId array_type) {
  const TypeDesc& d = reg.Resolved(array_type);
  if (d.kind() != TypeKind::kArray || !reg.IsPrimitive(d.array().element)) return false;
  const auto& prim = reg.Resolved(d.array().element).primitive();
  return prim.width_bits == 8 && !prim.is_float;
}

bool IsCharArray(const TypeRegistry& reg, TypeId array_type) {
  return IsByteElement(reg, array_type) &&
         reg.Same(reg.Resolved(array_type).array().element, reg.CharType());
}

// Grows an array value to `len` elements with random contents. Char arrays
// keep a terminating NUL.
void PadArray(Value& v, const TypeRegistry& reg, uint64_t len, Rng& rng) {
  uint64_t have = ArrayLength(reg, v);
  if (have >= len) return;
  const TypeDesc& d = reg.Resolved(v.type);
  if (d.array().fixed_len) return;
  if (auto* bs = std::get_if<ByteSeq>(&v.payload)) {
    uint64_t elem = reg.SizeOf(d.array().element);
    bool nul = IsCharArray(reg, v.type);
    while (bs->bytes.size() < len * elem) bs->bytes.push_back(static_cast<uint8_t>(rng()));
    if (nul && !bs->bytes.empty()) {
      for (uint64_t i = have; i + 1 < len; ++i) {
        if (bs->bytes[i] == 0) bs->bytes[i] = static_cast<uint8_t>(1 + rng() % 255);
      }
      bs->bytes.back() = 0;
    }
    return;
  }
  if (auto* el = std::get_if<ElementList>(&v.payload)) {
    while (el->items.size() < len) {
      auto item = GenerateValue(reg, d.array().element, rng, 1);
      if (!item.ok()) return;
      el->items.push_back(*std::move(item));
    }
  }
}

// Replaces every byte of a primitive array with random ones.
void Scramble(Value& v, const TypeRegistry& reg, Rng& rng) {
  auto* bs = std::get_if<ByteSeq>(&v.payload);
  if (bs == nullptr) return;
  for (auto& b : bs->bytes) b = static_cast<uint8_t>(rng());
  if (IsCharArray(reg, v.type) && !bs->bytes.empty()) {
    for (auto& b : bs->bytes) {
      if (b == 0) b = 1;
    }
    bs->bytes.back() = 0;
  }
}

Value CharString(const TypeRegistry& reg, uint64_t len, Rng& rng) {
  TypeId vec = *reg.VecOf(reg.CharType());
  Value v{vec, ByteSeq{}};
  auto& bytes = std::get<ByteSeq>(v.payload).bytes;
  for (uint64_t i = 0; i + 1 < len; ++i) bytes.push_back(static_cast<uint8_t>(1 + rng() % 255));
  bytes.push_back(0);
  return v;
}

size_t ReferenceCount(const Program& p, StmtIndex index) {
  size_t n = 0;
  for (const auto& s : p.statements()) {
    for (StmtIndex r : ReferencesOf(s)) n += r == index;
  }
  return n;
}

// Gives the call at `call_pos` a private copy of a shared top-level
// argument load and returns its place.
Place OwnArgument(Program& p, size_t& call_pos, uint32_t arg) {
  size_t pos = *ArgPosition(p, call_pos, arg);
  if (ReferenceCount(p, p[pos].index) <= 1) return Place{pos, {}};
  Statement copy = p[pos];
  p.InsertAt(call_pos, std::move(copy));
  p[call_pos + 1].call().args[arg] = static_cast<StmtIndex>(call_pos);
  ++call_pos;
  return Place{call_pos - 1, {}};
}

// Whether a load that holds null is written through its address by a call
// between it and `before`.
bool WrittenByCall(const Program& p, size_t load_pos, size_t before) {
  StmtIndex target = p[load_pos].index;
  std::set<StmtIndex> holders;
  for (size_t q = load_pos + 1; q < before && q < p.size(); ++q) {
    if (p[q].is_load()) {
      bool points = false;
      ForEachRef(p[q].load().value, [&](const LocationRef& r) {
        points = points || (r.address_of && r.index == target);
      });
      if (points) holders.insert(p[q].index);
    } else if (p[q].is_call()) {
      for (StmtIndex a : p[q].call().args) {
        if (holders.count(a)) return true;
      }
    }
  }
  return false;
}

int KindOrder(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::kNonNull: return 0;
    case ConstraintKind::kFile: return 1;
    case ConstraintKind::kCast: return 2;
    case ConstraintKind::kArrayLen: return 3;
    case ConstraintKind::kEqual: return 4;
    case ConstraintKind::kRange: return 5;
  }
  return 6;
}

std::vector<const Constraint*> Ordered(const ConstraintStore& store, std::string_view fn) {
  auto cs = store.For(fn);
  std::stable_sort(cs.begin(), cs.end(), [](const Constraint* a, const Constraint* b) {
    return KindOrder(a->kind) < KindOrder(b->kind);
  });
  return cs;
}

// Checking and repairing one constraint at one call.
class Repairer {
 public:
  Repairer(const Manifest& m, Rng* rng, ValueSynthesizer* synth, uint64_t pad)
      : m_(m), reg_(m.types()), rng_(rng), synth_(synth), pad_(pad) {}

  bool Holds(const Program& p, size_t call_pos, const Constraint& c) const {
    switch (c.kind) {
      case ConstraintKind::kNonNull: return NonNullHolds(p, call_pos, c.locator);
      case ConstraintKind::kFile: return FileHolds(p, call_pos, c.locator);
      case ConstraintKind::kCast: return CastHolds(p, call_pos, c.locator);
      case ConstraintKind::kArrayLen: return ArrayLenHolds(p, call_pos, c);
      case ConstraintKind::kEqual:
      case ConstraintKind::kRange: {
        if (c.kind == ConstraintKind::kRange && EmptyPeer(p, call_pos, c)) return false;
        auto want = NumericTarget(p, call_pos, c);
        return !want || *want == *NumberAt(p, *ResolvePlace(p, call_pos, c.locator, m_), reg_);
      }
    }
    return true;
  }

  absl::Status Fix(Program& p, size_t& call_pos, const Constraint& c) {
    switch (c.kind) {
      case ConstraintKind::kNonNull: return FixNonNull(p, call_pos, c.locator);
      case ConstraintKind::kFile: {
        Statement file{0, FileStmt{}};
        return Point(p, call_pos, c.locator, std::move(file), false);
      }
      case ConstraintKind::kCast: {
        Statement s{0, LoadStmt{*reg_.VecOf(reg_.CharType()), CharString(reg_, 1 + (*rng_)() % pad_, *rng_)}};
        return Point(p, call_pos, c.locator, std::move(s), true);
      }
      case ConstraintKind::kArrayLen: return FixArrayLen(p, call_pos, c);
      case ConstraintKind::kEqual:
      case ConstraintKind::kRange: {
        if (c.kind == ConstraintKind::kRange) {
          if (auto view = EmptyPeer(p, call_pos, c)) {
            PadArray(*MutableValueOf(p, view->array, reg_), reg_, view->offset + 1, *rng_);
          }
        }
        auto want = NumericTarget(p, call_pos, c);
        if (!want) return absl::OkStatus();
        Place pl = *ResolvePlace(p, call_pos, c.locator, m_);
        if (c.locator.path.empty()) pl = OwnArgument(p, call_pos, c.locator.arg);
        SetNumber(p, pl, reg_, *want);
        return absl::OkStatus();
      }
    }
    return absl::OkStatus();
  }

 private:
  TypeId ParamType(const Program& p, size_t call_pos, uint32_t arg) const {
    return m_.FindFunction(p[call_pos].call().name)->params[arg].type;
  }

  bool NonNullHolds(const Program& p, size_t call_pos, const Locator& l) const {
    if (l.path.empty()) {
      auto pos = ArgPosition(p, call_pos, l.arg);
      if (!pos) return true;
      size_t src = CopySource(p, *pos);
      if (NeedsGuard(p, src, call_pos)) return Guarded(p, src, call_pos);
      return !p[*pos].is_load() || !p[*pos].load().value.is_null();
    }
    auto pl = ResolvePlace(p, call_pos, l, m_);
    if (!pl) return true;
    const Value* v = ValueOf(p, *pl, reg_);
    return v == nullptr || !v->is_null();
  }

  bool FileHolds(const Program& p, size_t call_pos, const Locator& l) const {
    if (l.path.empty()) {
      auto pos = ArgPosition(p, call_pos, l.arg);
      return pos && p[*pos].is_file();
    }
    auto pl = ResolvePlace(p, call_pos, l, m_);
    if (!pl) return true;
    const Value* v = ValueOf(p, *pl, reg_);
    if (v == nullptr) return true;
    const auto* ref = std::get_if<LocationRef>(&v->payload);
    if (ref == nullptr || ref->address_of) return false;
    auto src = p.PositionOf(ref->index);
    return src && p[*src].is_file();
  }

  bool CastHolds(const Program& p, size_t call_pos, const Locator& l) const {
    auto pl = ResolvePlace(p, call_pos, l, m_);
    if (!pl) {
      // A pointer produced by a call is not a byte array.
      auto pos = ArgPosition(p, call_pos, l.arg);
      return !(l.path.empty() && pos && p[*pos].is_call());
    }
    const Value* v = ValueOf(p, *pl, reg_);
    if (v == nullptr || v->is_null()) return true;
    auto view = PointedArray(p, *pl, reg_);
    if (!view || view->offset != 0) return false;
    const Value* arr = ValueOf(p, view->array, reg_);
    if (!IsCharArray(reg_, arr->type)) return false;
    const auto* bs = std::get_if<ByteSeq>(&arr->payload);
    return bs != nullptr && !bs->bytes.empty() && bs->bytes.back() == 0;
  }

  bool ArrayLenHolds(const Program& p, size_t call_pos, const Constraint& c) const {
    auto pl = ResolvePlace(p, call_pos, c.locator, m_);
    if (!pl) return true;
    const Value* v = ValueOf(p, *pl, reg_);
    if (v == nullptr || v->is_null() || !reg_.IsPointer(v->type)) return true;
    auto view = PointedArray(p, *pl, reg_);
    if (view) return view->length >= c.min_len;
    TypeId pointee = reg_.Resolved(v->type).pointer().pointee;
    return !reg_.IsPrimitive(pointee) || !Deref(p, *pl, reg_);
  }

  // Value an EQUAL or RANGE slot must take, or nullopt if it already holds
  // or cannot be judged.
  // The peer array when it has no element left for any index.
  std::optional<ArrayView> EmptyPeer(const Program& p, size_t call_pos, const Constraint& c) const {
    if (!c.peer) return std::nullopt;
    auto peer = ResolvePlace(p, call_pos, *c.peer, m_);
    if (!peer) return std::nullopt;
    auto view = PointedArray(p, *peer, reg_);
    if (!view || view->length > 0) return std::nullopt;
    return view;
  }

  std::optional<int64_t> NumericTarget(const Program& p, size_t call_pos, const Constraint& c) const {
    auto pl = ResolvePlace(p, call_pos, c.locator, m_);
    if (!pl) return std::nullopt;
    auto cur = NumberAt(p, *pl, reg_);
    if (!cur) return std::nullopt;
    std::optional<uint64_t> len;
    if (c.peer) {
      if (auto peer = ResolvePlace(p, call_pos, *c.peer, m_)) {
        if (auto view = PointedArray(p, *peer, reg_)) len = view->length;
      }
    }
    const auto& prim = reg_.Resolved(ValueOf(p, *pl, reg_)->type).primitive();
    int64_t want = *cur;
    if (c.kind == ConstraintKind::kEqual) {
      if (!len) return std::nullopt;
      want = static_cast<int64_t>(*len);
    } else {
      if (c.min && want < *c.min) want = *c.min;
      if (c.max && want > *c.max) want = *c.max;
      if (len && *len > 0 && want >= static_cast<int64_t>(*len)) want = static_cast<int64_t>(*len) - 1;
    }
    if (want == *cur || !FitsType(prim, want)) return std::nullopt;
    return want;
  }

  // Makes the slot refer to a new statement inserted before it: by
  // address for loads when `address` is set, else by value.
  absl::Status Point(Program& p, size_t& call_pos, const Locator& l, Statement s, bool address) {
    if (l.path.empty()) {
      p.InsertAt(call_pos, std::move(s));
      size_t made = call_pos++;
      if (address) {
        TypeId t = ParamType(p, call_pos, l.arg);
        LoadStmt ptr{t, Value{t, LocationRef{static_cast<StmtIndex>(made), {}, true}}};
        p.InsertAt(call_pos, Statement{0, std::move(ptr)});
        made = call_pos++;
      }
      p[call_pos].call().args[l.arg] = static_cast<StmtIndex>(made);
      return absl::OkStatus();
    }
    auto pl = ResolvePlace(p, call_pos, l, m_);
    if (!pl) return absl::OkStatus();
    size_t at = pl->pos;
    p.InsertAt(at, std::move(s));
    ++call_pos;
    Value* v = MutableValueOf(p, Place{at + 1, pl->path}, reg_);
    if (v == nullptr) return absl::InternalError("slot vanished");
    v->payload = LocationRef{static_cast<StmtIndex>(at), {}, address};
    return absl::OkStatus();
  }

  // Statement a chain of whole-value copies starts from.
  static size_t CopySource(const Program& p, size_t pos) {
    for (int hop = 0; hop < 8 && p[pos].is_load(); ++hop) {
      const auto* ref = std::get_if<LocationRef>(&p[pos].load().value.payload);
      if (ref == nullptr || ref->address_of || !ref->path.empty()) break;
      auto next = p.PositionOf(ref->index);
      if (!next) break;
      pos = *next;
    }
    return pos;
  }

  // A call result, or a null load a call writes through, is non-null
  // only when an assert checks it before the call.
  bool NeedsGuard(const Program& p, size_t pos, size_t call_pos) const {
    if (p[pos].is_call()) return true;
    return p[pos].is_load() && p[pos].load().value.is_null() && WrittenByCall(p, pos, call_pos);
  }

  static bool Guarded(const Program& p, size_t pos, size_t call_pos) {
    for (size_t q = pos + 1; q < call_pos; ++q) {
      if (!p[q].is_assert()) continue;
      const auto& a = std::get<AssertStmt>(p[q].body);
      if (a.rule == AssertStmt::Rule::kNonNull && a.lhs == p[pos].index) return true;
    }
    return false;
  }

  absl::Status FixNonNull(Program& p, size_t& call_pos, const Locator& l) {
    auto type = LocatorType(*m_.FindFunction(p[call_pos].call().name), l, reg_);
    if (!type.ok() || !reg_.IsPointer(*type)) return absl::OkStatus();
    if (l.path.empty()) {
      auto pos = ArgPosition(p, call_pos, l.arg);
      if (pos) pos = CopySource(p, *pos);
      if (pos && NeedsGuard(p, *pos, call_pos)) {
        AssertStmt check{AssertStmt::Rule::kNonNull, p[*pos].index, 0};
        p.InsertAt(call_pos, Statement{0, check});
        ++call_pos;
        return absl::OkStatus();
      }
    }
    size_t at = call_pos;
    if (!l.path.empty()) {
      auto pl = ResolvePlace(p, call_pos, l, m_);
      if (!pl) return absl::OkStatus();
      at = pl->pos;
    }
    size_t before = p.size();
    std::optional<StmtIndex> made;
    if (synth_ != nullptr) made = synth_->ProduceNonNull(p, at, *type, *rng_);
    if (!made) {
      TypeId pointee = reg_.Resolved(*type).pointer().pointee;
      TypeKind pk = reg_.KindOf(pointee);
      if (pk == TypeKind::kOpaque || pk == TypeKind::kVoid || pk == TypeKind::kFuncPtr) {
        return absl::FailedPreconditionError(absl::StrCat(
            "no producer for non-null '", reg_.Get(*type).name, "' in '", p[call_pos].call().name, "'"));
      }
      auto value = GenerateValue(reg_, pointee, *rng_, 2);
      if (!value.ok()) return value.status();
      p.InsertAt(at, Statement{0, LoadStmt{pointee, *std::move(value)}});
      p.InsertAt(at + 1, Statement{0, LoadStmt{*type, Value{*type, LocationRef{static_cast<StmtIndex>(at), {}, true}}}});
      made = static_cast<StmtIndex>(at + 1);
    }
    size_t grown = p.size() - before;
    call_pos += grown;
    if (l.path.empty()) {
      p[call_pos].call().args[l.arg] = *made;
      return absl::OkStatus();
    }
    auto pl = ResolvePlace(p, call_pos, l, m_);
    if (!pl) return absl::OkStatus();
    Value* v = MutableValueOf(p, *pl, reg_);
    if (v == nullptr) return absl::OkStatus();
    v->payload = LocationRef{*made, {}, false};
    return absl::OkStatus();
  }

  absl::Status FixArrayLen(Program& p, size_t& call_pos, const Constraint& c) {
    auto pl = ResolvePlace(p, call_pos, c.locator, m_);
    if (!pl) return absl::OkStatus();
    if (auto view = PointedArray(p, *pl, reg_)) {
      Value* arr = MutableValueOf(p, view->array, reg_);
      PadArray(*arr, reg_, view->offset + c.min_len, *rng_);
      return absl::OkStatus();
    }
    const Value* v = ValueOf(p, *pl, reg_);
    TypeId pointee = reg_.Resolved(v->type).pointer().pointee;
    auto vec = reg_.VecOf(pointee);
    if (!vec) vec = reg_.VecOf(reg_.Resolve(pointee));
    if (!vec) return absl::OkStatus();
    Value arr{*vec, ByteSeq{}};
    PadArray(arr, reg_, c.min_len, *rng_);
    return Point(p, call_pos, c.locator, Statement{0, LoadStmt{*vec, std::move(arr)}}, true);
  }

  const Manifest& m_;
  const TypeRegistry& reg_;
  Rng* rng_;
  ValueSynthesizer* synth_;
  uint64_t pad_;
};

}  // namespace

std::optional<SlotRef> ResolveSlot(const Program& p, size_t call_pos, const Locator& l,
                                   const Manifest& m) {
  auto pl = ResolvePlace(p, call_pos, l, m);
  if (!pl) return std::nullopt;
  return SlotRef{pl->pos, pl->path};
}

std::vector<std::pair<Locator, TypeId>> EnumerateSlots(const Program& p, size_t call_pos,
                                                       const Manifest& m) {
  std::vector<std::pair<Locator, TypeId>> out;
  const CallStmt* call = CallAt(p, call_pos);
  if (call == nullptr) return out;
  const FuncSig* sig = m.FindFunction(call->name);
  if (sig == nullptr) return out;
  for (uint32_t i = 0; i < sig->params.size() && i < call->args.size(); ++i) {
    auto pos = ArgPosition(p, call_pos, i);
    std::optional<Place> place;
    if (pos && p[*pos].is_load()) place = Place{*pos, {}};
    WalkSlots(p, m.types(), place, sig->params[i].type, Locator{i, {}}, out);
  }
  return out;
}

absl::StatusOr<TypeId> LocatorType(const FuncSig& sig, const Locator& l, const TypeRegistry& reg) {
  if (l.arg >= sig.params.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", sig.name, "' has no argument ", l.arg));
  }
  if (l.path.size() > kMaxLocatorDepth) {
    return absl::InvalidArgumentError("locator is deeper than the limit");
  }
  return PathType(reg, sig.params[l.arg].type, l.path);
}

std::vector<Constraint> InferFromPath(const Program& p, const FeedbackReport& r, const Manifest& m,
                                      ConstraintStore& store, uint64_t witness) {
  (void)p;
  const TypeRegistry& reg = m.types();
  std::vector<Constraint> out;
  for (const auto& call : r.calls) {
    const FuncSig* sig = m.FindFunction(call.function);
    if (sig == nullptr) continue;
    for (const auto& [param, text] : call.arg_strings) {
      if (param >= sig->params.size() || text.empty() || !reg.IsStringPointer(sig->params[param].type)) {
        continue;
      }
      bool opened = std::any_of(r.resource_log.begin(), r.resource_log.end(), [&](const ResourceEvent& e) {
        return e.kind == ResourceEvent::Kind::kFileOpen && e.stmt == call.stmt && e.name == text;
      });
      if (!opened) continue;
      Constraint c;
      c.function = call.function;
      c.locator = Locator{static_cast<uint32_t>(param), {}};
      c.kind = ConstraintKind::kFile;
      c.provenance = "path: argument string opened as a file";
      c.witness = witness;
      if (store.Add(c)) out.push_back(c);
    }
    for (uint32_t i = 0; i < sig->params.size(); ++i) {
      if (!reg.IsBareVoidPointer(sig->params[i].type)) continue;
      if (!store.MarkCastCandidate(call.function, i)) continue;
      Constraint c;
      c.function = call.function;
      c.locator = Locator{i, {}};
      c.kind = ConstraintKind::kCast;
      c.as_type = "char*";
      c.provenance = "path: untyped pointer, provisional";
      c.witness = witness;
      if (store.Add(c)) out.push_back(c);
    }
  }
  return out;
}

namespace {

class CrashAnalysis {
 public:
  CrashAnalysis(const Program& p, const FeedbackReport& r, Executor& exec, ConstraintStore& store,
                Rng& rng, uint64_t witness, const InferConfig& cfg)
      : p_(p), r_(r), exec_(exec), m_(exec.manifest()), reg_(m_.types()), store_(store),
        rng_(rng), witness_(witness), cfg_(cfg) {}

  CrashVerdict Run() {
    const Fault& f = *r_.fault;
    auto call_pos = p_.PositionOf(f.stmt);
    if (!call_pos || !p_[*call_pos].is_call()) return verdict_;
    call_pos_ = *call_pos;
    fn_ = p_[call_pos_].call().name;
    slots_ = EnumerateSlots(p_, call_pos_, m_);
    bool segv = f.kind == FaultKind::kNullDeref || f.kind == FaultKind::kCanaryHit ||
                f.kind == FaultKind::kInvalidAccess;
    if (f.kind == FaultKind::kNullDeref && Step1()) return Done(1);
    if (f.kind == FaultKind::kCanaryHit) {
      auto overflowed = OverflowedArray();
      if (overflowed && Step2(*overflowed)) return Done(2);
      if (overflowed && Step3(*overflowed)) return Done(3);
    }
    if (segv && Step4()) return Done(4);
    if ((f.kind == FaultKind::kTimeout || f.kind == FaultKind::kOom) && Step5()) return Done(5);
    if (exhausted_) verdict_.low_confidence = true;
    return Finish();
  }

 private:
  struct Overflow {
    Locator pointer;
    ArrayView view;
  };

  CrashVerdict Done(int step) {
    verdict_.kind = CrashVerdict::Kind::kSpurious;
    verdict_.step = step;
    return Finish();
  }

  CrashVerdict Finish() {
    verdict_.reexecs = reexecs_;
    return verdict_;
  }

  std::optional<FeedbackReport> Probe(const Program& q) {
    if (reexecs_ >= cfg_.max_reexecs) {
      exhausted_ = true;
      return std::nullopt;
    }
    ++reexecs_;
    return exec_.Execute(q);
  }

  void Learn(Constraint c, std::string provenance) {
    c.function = fn_;
    c.provenance = std::move(provenance);
    c.witness = witness_;
    if (store_.Add(c)) verdict_.learned.push_back(std::move(c));
  }

  uint64_t Guard() const { return exec_.config().canary_page_bytes; }

  // Step 1: a null pointer aimed at a protected chunk faults on the chunk.
  bool Step1() {
    bool any = false;
    for (const auto& [loc, type] : slots_) {
      if (!reg_.IsPointer(type) || !IsNullAtRuntime(loc)) continue;
      Program q = p_;
      size_t call_pos = call_pos_;
      size_t chunk_at;
      Value chunk{reg_.ByteVecType(), ByteSeq{}};
      if (loc.path.empty()) {
        chunk_at = call_pos;
        q.InsertAt(call_pos, Statement{0, LoadStmt{reg_.ByteVecType(), chunk}});
        LoadStmt ptr{type, Value{type, LocationRef{static_cast<StmtIndex>(chunk_at), {}, true}}};
        q.InsertAt(call_pos + 1, Statement{0, std::move(ptr)});
        call_pos += 2;
        q[call_pos].call().args[loc.arg] = static_cast<StmtIndex>(call_pos - 1);
      } else {
        auto pl = ResolvePlace(q, call_pos, loc, m_);
        if (!pl) continue;
        chunk_at = pl->pos;
        q.InsertAt(chunk_at, Statement{0, LoadStmt{reg_.ByteVecType(), chunk}});
        ++call_pos;
        Value* v = MutableValueOf(q, Place{chunk_at + 1, pl->path}, reg_);
        if (v == nullptr) continue;
        v->payload = LocationRef{static_cast<StmtIndex>(chunk_at), {}, true};
      }
      auto pr = Probe(q);
      if (!pr) return any;
      if (!pr->fault || pr->fault->kind != FaultKind::kCanaryHit ||
          pr->fault->crash_site != r_.fault->crash_site) {
        continue;
      }
      bool in_chunk = false;
      for (const auto& reg : pr->regions) {
        if (reg.stmt != chunk_at) continue;
        uint64_t lo = reg.base + reg.size;
        in_chunk = pr->fault->address >= lo && pr->fault->address < lo + Guard();
      }
      if (!in_chunk) continue;
      Constraint c;
      c.locator = loc;
      c.kind = ConstraintKind::kNonNull;
      Learn(c, "crash: null dereference confirmed on a protected chunk");
      any = true;
    }
    return any;
  }

  bool IsNullAtRuntime(const Locator& loc) const {
    if (loc.path.empty()) {
      auto pos = ArgPosition(p_, call_pos_, loc.arg);
      if (!pos) return false;
      if (p_[*pos].is_call()) {
        for (const auto& c : r_.calls) {
          if (c.stmt == p_[*pos].index) return c.returned && c.ret == 0;
        }
        return false;
      }
      return p_[*pos].is_load() && p_[*pos].load().value.is_null();
    }
    auto pl = ResolvePlace(p_, call_pos_, loc, m_);
    if (!pl) return false;
    const Value* v = ValueOf(p_, *pl, reg_);
    return v != nullptr && v->is_null();
  }

  std::optional<Overflow> OverflowedArray() const {
    const Fault& f = *r_.fault;
    std::optional<size_t> array_pos;
    for (const auto& reg : r_.regions) {
      uint64_t lo = reg.base + reg.size;
      if (f.address >= lo && f.address < lo + Guard()) array_pos = p_.PositionOf(reg.stmt);
    }
    if (!array_pos) return std::nullopt;
    for (const auto& [loc, type] : slots_) {
      if (!reg_.IsPointer(type)) continue;
      auto pl = ResolvePlace(p_, call_pos_, loc, m_);
      if (!pl) continue;
      auto view = PointedArray(p_, *pl, reg_);
      if (view && view->array.pos == *array_pos && view->array.path.empty()) {
        return Overflow{loc, *view};
      }
    }
    return std::nullopt;
  }

  // Step 2: the N-1 / N / N+1 probe over numeric slots.
  bool Step2(const Overflow& o) {
    uint64_t n = o.view.length;
    if (n == 0) return false;
    for (const auto& [loc, type] : slots_) {
      if (!IsIntegerType(reg_, type)) continue;
      auto pl = ResolvePlace(p_, call_pos_, loc, m_);
      if (!pl || !NumberAt(p_, *pl, reg_)) continue;
      const auto& prim = reg_.Resolved(ValueOf(p_, *pl, reg_)->type).primitive();
      if (!FitsType(prim, static_cast<int64_t>(n) + 1)) continue;
      LengthProbe row{loc, o.pointer, n, {}};
      for (int k = 0; k < 3; ++k) {
        Program q = p_;
        SetNumber(q, *pl, reg_, static_cast<int64_t>(n) - 1 + k);
        auto pr = Probe(q);
        if (!pr) return false;
        row.crashed[k] = pr->IsCrash();
      }
      verdict_.probes.push_back(row);
      if (row.crashed[0]) continue;
      Constraint c;
      c.locator = loc;
      c.peer = o.pointer;
      if (!row.crashed[1] && row.crashed[2]) {
        c.kind = ConstraintKind::kEqual;
        Learn(c, absl::StrCat("crash: only N+1 overflows (N=", n, ")"));
        return true;
      }
      if (row.crashed[1] && row.crashed[2]) {
        c.kind = ConstraintKind::kRange;
        c.min = 0;
        Learn(c, absl::StrCat("crash: N and N+1 overflow (N=", n, ")"));
        return true;
      }
    }
    return false;
  }

  // Step 3: padding the overflowed array to K resolves the crash.
  bool Step3(const Overflow& o) {
    if (store_.Find(fn_, o.pointer, ConstraintKind::kCast) != nullptr) return false;
    if (o.view.length >= cfg_.pad_length) return false;
    Program q = p_;
    Value* arr = MutableValueOf(q, o.view.array, reg_);
    PadArray(*arr, reg_, o.view.offset + cfg_.pad_length, rng_);
    auto pr = Probe(q);
    if (!pr || !pr->NormalExit()) return false;
    Constraint c;
    c.locator = o.pointer;
    c.kind = ConstraintKind::kArrayLen;
    c.min_len = cfg_.pad_length;
    Learn(c, absl::StrCat("crash: padding to ", cfg_.pad_length, " elements resolves the overflow"));
    return true;
  }

  // Step 4: a CAST slot whose random contents move the fault address is
  // not a byte buffer.
  bool Step4() {
    bool any = false;
    std::vector<Constraint> casts;
    for (const Constraint* c : store_.For(fn_)) {
      if (c->kind == ConstraintKind::kCast) casts.push_back(*c);
    }
    for (const auto& c : casts) {
      auto pl = ResolvePlace(p_, call_pos_, c.locator, m_);
      if (!pl) continue;
      auto view = PointedArray(p_, *pl, reg_);
      if (!view) continue;
      std::optional<uint64_t> addresses[2];
      for (int k = 0; k < 2; ++k) {
        Program q = p_;
        Value* arr = MutableValueOf(q, view->array, reg_);
        PadArray(*arr, reg_, view->offset + cfg_.pad_length, rng_);
        Scramble(*arr, reg_, rng_);
        auto pr = Probe(q);
        if (!pr) return any;
        if (pr->fault) addresses[k] = pr->fault->address;
      }
      if (!addresses[0] || !addresses[1] || *addresses[0] == *addresses[1]) continue;
      std::string why = "crash: fault address follows the pointed bytes";
      for (ConstraintKind k : {ConstraintKind::kCast, ConstraintKind::kArrayLen}) {
        if (const Constraint* old = store_.Find(fn_, c.locator, k)) {
          Constraint gone = *old;
          if (store_.Remove(fn_, c.locator, k, why)) verdict_.removed.push_back(std::move(gone));
        }
      }
      any = true;
    }
    return any;
  }

  bool Acceptable(const FeedbackReport& pr) const {
    if (pr.NormalExit()) return true;
    return r_.exit == ExitKind::kTimeout && pr.exit != ExitKind::kTimeout && !pr.IsCrash() &&
           static_cast<double>(pr.virtual_time) <
               cfg_.faster_fraction * static_cast<double>(r_.virtual_time);
  }

  // Step 5: shrink large numbers until the run is fine, then search the
  // largest value that still is.
  bool Step5() {
    for (const auto& [loc, type] : slots_) {
      if (!IsIntegerType(reg_, type)) continue;
      auto pl = ResolvePlace(p_, call_pos_, loc, m_);
      if (!pl) continue;
      auto v = NumberAt(p_, *pl, reg_);
      if (!v || *v < 2) continue;
      auto run = [&](int64_t x) -> std::optional<bool> {
        Program q = p_;
        SetNumber(q, *pl, reg_, x);
        auto pr = Probe(q);
        if (!pr) return std::nullopt;
        return Acceptable(*pr);
      };
      int64_t bad = *v;
      std::optional<int64_t> good;
      for (int64_t x = *v / 2; x >= 0; x /= 2) {
        auto ok = run(x);
        if (!ok) return false;
        if (*ok) {
          good = x;
          break;
        }
        bad = x;
        if (x == 0) break;
      }
      if (!good) continue;
      int64_t lo = *good;
      int64_t hi = bad;
      while (hi - lo > 1) {
        int64_t mid = lo + (hi - lo) / 2;
        auto ok = run(mid);
        if (!ok) return false;
        (*ok ? lo : hi) = mid;
      }
      Constraint c;
      c.locator = loc;
      c.kind = ConstraintKind::kRange;
      c.max = lo;
      Learn(c, absl::StrCat("crash: ", std::string(ExitKindName(r_.exit)), " above ", lo));
      return true;
    }
    return false;
  }

  const Program& p_;
  const FeedbackReport& r_;
  Executor& exec_;
  const Manifest& m_;
  const TypeRegistry& reg_;
  ConstraintStore& store_;
  Rng& rng_;
  uint64_t witness_;
  const InferConfig& cfg_;
  size_t call_pos_ = 0;
  std::string fn_;
  std::vector<std::pair<Locator, TypeId>> slots_;
  CrashVerdict verdict_;
  uint32_t reexecs_ = 0;
  bool exhausted_ = false;
};

}  // namespace

CrashVerdict InferFromCrash(const Program& p, const FeedbackReport& r, Executor& exec,
                            ConstraintStore& store, Rng& rng, uint64_t witness,
                            const InferConfig& cfg) {
  if (!r.fault) return CrashVerdict{};
  return CrashAnalysis(p, r, exec, store, rng, witness, cfg).Run();
}

absl::StatusOr<Program> Refine(const Program& p, const ConstraintStore& store, const Manifest& m,
                               Rng& rng, ValueSynthesizer* synth, uint64_t pad_length) {
  Program q = p;
  Repairer fix(m, &rng, synth, std::max<uint64_t>(pad_length, 1));
  for (size_t pos = 0; pos < q.size(); ++pos) {
    if (!q[pos].is_call()) continue;
    // Each constraint may insert statements before the call; re-check the
    // earlier ones after any repair since padding can change lengths.
    for (int round = 0; round < 4; ++round) {
      bool changed = false;
      for (const Constraint* c : Ordered(store, q[pos].call().name)) {
        if (fix.Holds(q, pos, *c)) continue;
        if (auto st = fix.Fix(q, pos, *c); !st.ok()) return st;
        changed = true;
      }
      if (!changed) break;
    }
  }
  if (!SatisfiesConstraints(q, store, m)) {
    return absl::FailedPreconditionError("constraints could not be satisfied together");
  }
  return q;
}

bool SatisfiesConstraints(const Program& p, const ConstraintStore& store, const Manifest& m) {
  Repairer check(m, nullptr, nullptr, 1);
  for (size_t pos = 0; pos < p.size(); ++pos) {
    if (!p[pos].is_call()) continue;
    for (const Constraint* c : store.For(p[pos].call().name)) {
      if (!check.Holds(p, pos, *c)) return false;
    }
  }
  return true;
}

std::string_view RelationRuleName(RelationRule r) {
  switch (r) {
    case RelationRule::kRetToArg: return "ret-to-arg";
    case RelationRule::kSharedArgType: return "shared-arg-type";
    case RelationRule::kMutatorPointer: return "mutator-pointer";
  }
  return "?";
}

bool RelationGraph::HasStatic(std::string_view producer, std::string_view consumer) const {
  return std::any_of(static_edges.begin(), static_edges.end(), [&](const StaticEdge& e) {
    return e.producer == producer && e.consumer == consumer;
  });
}

bool RelationGraph::HasEffective(std::string_view from, std::string_view to) const {
  return std::any_of(effective_edges.begin(), effective_edges.end(),
                     [&](const EffectiveEdge& e) { return e.from == from && e.to == to; });
}

bool RelationGraph::AddEffective(EffectiveEdge e) {
  if (HasEffective(e.from, e.to)) return false;
  effective_edges.push_back(std::move(e));
  return true;
}

std::vector<std::string> RelationGraph::Neighbors(std::string_view fn) const {
  std::vector<std::string> out;
  for (const auto& e : static_edges) {
    const std::string* other = nullptr;
    if (e.producer == fn) other = &e.consumer;
    if (e.consumer == fn) other = &e.producer;
    if (other != nullptr && *other != fn &&
        std::find(out.begin(), out.end(), *other) == out.end()) {
      out.push_back(*other);
    }
  }
  return out;
}

namespace {

// Types that tie functions together: not primitives, not strings and not
// bare void pointers.
bool RelatingType(const TypeRegistry& reg, TypeId t) {
  TypeKind k = reg.KindOf(t);
  if (k == TypeKind::kPrimitive || k == TypeKind::kVoid) return false;
  if (reg.IsStringPointer(t) || reg.IsBareVoidPointer(t)) return false;
  return true;
}

}  // namespace

RelationGraph InferStaticRelations(const Manifest& m) {
  const TypeRegistry& reg = m.types();
  RelationGraph g;
  auto add = [&](const std::string& producer, const std::string& consumer, RelationRule rule,
                 bool ident) {
    for (auto& e : g.static_edges) {
      if (e.producer == producer && e.consumer == consumer && e.rule == rule) {
        e.identifier_match = e.identifier_match || ident;
        return;
      }
    }
    g.static_edges.push_back(StaticEdge{producer, consumer, rule, ident});
  };
  const auto& fns = m.functions();
  for (const auto& f2 : fns) {
    for (const auto& f1 : fns) {
      if (f1.name == f2.name) continue;
      for (const auto& a : f1.params) {
        // F2 returns the type F1 takes.
        if (!reg.IsVoid(f2.ret) && RelatingType(reg, f2.ret) && reg.Same(f2.ret, a.type)) {
          add(f2.name, f1.name, RelationRule::kRetToArg, false);
        }
        for (const auto& b : f2.params) {
          if (RelatingType(reg, a.type) && reg.Same(a.type, b.type)) {
            add(f2.name, f1.name, RelationRule::kSharedArgType, a.name == b.name);
          }
          // F2 takes a T* that may modify the T F1 takes.
          if (reg.IsPointer(b.type) && RelatingType(reg, a.type) &&
              reg.Same(reg.Resolved(b.type).pointer().pointee, a.type)) {
            add(f2.name, f1.name, RelationRule::kMutatorPointer, a.name == b.name);
          }
        }
      }
    }
  }
  return g;
}

EffectiveResult LearnEffectiveRelation(const Program& seed,
                                       const std::vector<size_t>& inserted_positions,
                                       const std::vector<uint32_t>& baseline_coverage,
                                       Executor& exec, uint64_t witness) {
  EffectiveResult out;
  auto target = seed.TargetPosition();
  if (!target) {
    out.program = seed;
    return out;
  }
  std::string target_fn = seed[*target].call().name;
  std::vector<uint32_t> baseline = baseline_coverage;
  std::sort(baseline.begin(), baseline.end());
  std::set<size_t> removed;
  for (size_t pos : inserted_positions) {
    if (pos >= seed.size() || !seed[pos].is_call() || pos >= *target) continue;
    auto deps = DependentsOf(seed, pos);
    std::set<size_t> drop(deps.begin(), deps.end());
    const std::string& fn = seed[pos].call().name;
    if (drop.count(*target)) {
      out.kept.push_back(EffectiveEdge{fn, target_fn, witness});
      continue;
    }
    drop.insert(removed.begin(), removed.end());
    Program q = seed;
    q.ErasePositions(std::vector<size_t>(drop.begin(), drop.end()));
    auto r = exec.Execute(q);
    std::vector<uint32_t> keys = r.CoverageKeys();
    if (keys != baseline) {
      out.kept.push_back(EffectiveEdge{fn, target_fn, witness});
    } else {
      out.dropped.push_back(fn);
      removed.insert(deps.begin(), deps.end());
    }
  }
  out.program = seed;
  out.program.ErasePositions(std::vector<size_t>(removed.begin(), removed.end()));
  return out;
}

Slice SliceFor(const Program& p, size_t pos, size_t before) {
  std::set<size_t> keep;
  std::vector<size_t> work = {pos};
  auto take = [&](size_t q) {
    if (keep.insert(q).second) work.push_back(q);
  };
  keep.insert(pos);
  while (true) {
    while (!work.empty()) {
      size_t q = work.back();
      work.pop_back();
      for (StmtIndex r : ReferencesOf(p[q])) {
        if (auto rp = p.PositionOf(r)) take(*rp);
      }
    }
    // Calls that write into kept loads through their address also produce
    // the value, as do asserts on kept values.
    size_t kept = keep.size();
    for (size_t q = 0; q < before && q < p.size(); ++q) {
      if (keep.count(q)) continue;
      const Statement& s = p[q];
      bool needed = false;
      if (s.is_call()) {
        for (StmtIndex a : s.call().args) {
          auto ap = p.PositionOf(a);
          if (!ap || !p[*ap].is_load()) continue;
          ForEachRef(p[*ap].load().value, [&](const LocationRef& r) {
            auto rp = p.PositionOf(r.index);
            needed = needed || (r.address_of && rp && keep.count(*rp));
          });
        }
      } else if (s.is_assert() || s.is_update()) {
        auto refs = ReferencesOf(s);
        needed = std::all_of(refs.begin(), refs.end(), [&](StmtIndex r) {
          auto rp = p.PositionOf(r);
          return rp && keep.count(*rp);
        });
      }
      if (needed) take(q);
    }
    if (keep.size() == kept && work.empty()) break;
  }
  std::vector<Statement> stmts;
  size_t value = 0;
  for (size_t q : keep) {
    if (q == pos) value = stmts.size();
    Statement s = p[q];
    if (s.is_call()) {
      s.call().tracked = false;
      s.call().role = CallRole::kPlain;
    }
    stmts.push_back(std::move(s));
  }
  Slice out{Program(std::move(stmts)), value};
  out.program.Normalize();
  return out;
}

void EffectiveArgCache::Add(const Program& p, size_t call_pos, size_t param, const Manifest& m) {
  const CallStmt* call = CallAt(p, call_pos);
  if (call == nullptr || param >= call->args.size()) return;
  const FuncSig* sig = m.FindFunction(call->name);
  if (sig == nullptr || param >= sig->params.size()) return;
  auto pos = p.PositionOf(call->args[param]);
  if (!pos) return;
  Slice slice = SliceFor(p, *pos, call_pos);
  auto& list = slices_[{call->name, sig->params[param].name}];
  if (std::find(list.begin(), list.end(), slice) != list.end()) return;
  constexpr size_t kMaxPerSlot = 16;
  if (list.size() >= kMaxPerSlot) list.erase(list.begin());
  list.push_back(std::move(slice));
}

const std::vector<Slice>* EffectiveArgCache::Get(std::string_view function,
                                                   std::string_view param) const {
  auto it = slices_.find({std::string(function), std::string(param)});
  return it == slices_.end() ? nullptr : &it->second;
}

size_t EffectiveArgCache::size() const {
  size_t n = 0;
  for (const auto& [key, list] : slices_) n += list.size();
  return n;
}

}  // namespace apifuzz

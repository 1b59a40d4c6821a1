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

#include "apifuzz/value_gen.h"

#include <algorithm>
#include <cfloat>
#include <cstring>
#include <limits>
#include <utility>

#include "absl/strings/str_cat.h"

namespace apifuzz {
namespace {

uint64_t Uniform(Rng& rng, uint64_t lo, uint64_t hi) {
  return std::uniform_int_distribution<uint64_t>(lo, hi)(rng);
}

bool Coin(Rng& rng) { return (rng() & 1) != 0; }

template <typename T>
const T& Pick(Rng& rng, const std::vector<T>& v) {
  return v[Uniform(rng, 0, v.size() - 1)];
}

uint64_t ReadElem(const std::vector<uint8_t>& bytes, uint64_t i, uint64_t width) {
  uint64_t out = 0;
  std::memcpy(&out, bytes.data() + i * width, width);
  return out;
}

void WriteElem(std::vector<uint8_t>& bytes, uint64_t i, uint64_t width, uint64_t v) {
  std::memcpy(bytes.data() + i * width, &v, width);
}

Number GenerateNumber(const PrimitiveType& prim, Rng& rng, const ValueGenConfig& cfg) {
  if (!prim.variants.empty() && Coin(rng)) {
    return NumberFromInt(prim, prim.variants[Uniform(rng, 0, prim.variants.size() - 1)]);
  }
  if (prim.is_float) {
    double d = std::uniform_real_distribution<double>(static_cast<double>(cfg.small_min),
                                                      static_cast<double>(cfg.small_max))(rng);
    return NumberFromDouble(prim, d);
  }
  if (prim.width_bits == 8) return Number{Uniform(rng, 0, 255)};
  int64_t lo = prim.is_signed ? cfg.small_min : 0;
  auto v = std::uniform_int_distribution<int64_t>(lo, cfg.small_max)(rng);
  return NumberFromInt(prim, v);
}

Number MutateNumber(const PrimitiveType& prim, Number n, MutationStrategy s, Rng& rng,
                    std::span<const uint64_t> cmp) {
  uint64_t mask = WidthMask(prim.width_bits);
  switch (s) {
    case MutationStrategy::kInteresting:
      return Number{Pick(rng, InterestingValues(prim)) & mask};
    case MutationStrategy::kBitFlip:
      return Number{(n.bits ^ (uint64_t{1} << Uniform(rng, 0, prim.width_bits - 1))) & mask};
    case MutationStrategy::kByteFlip:
      return Number{(n.bits ^ (uint64_t{0xff} << (8 * Uniform(rng, 0, prim.width_bits / 8 - 1)))) &
                    mask};
    case MutationStrategy::kArith: {
      auto delta = static_cast<int64_t>(Uniform(rng, 1, 35));
      if (Coin(rng)) delta = -delta;
      if (prim.is_float) return NumberFromDouble(prim, NumberAsDouble(prim, n) + delta);
      return Number{(n.bits + static_cast<uint64_t>(delta)) & mask};
    }
    case MutationStrategy::kCmpLiteral:
      if (cmp.empty()) return Number{Pick(rng, InterestingValues(prim)) & mask};
      return Number{cmp[Uniform(rng, 0, cmp.size() - 1)] & mask};
    default:
      return n;
  }
}

std::vector<MutationStrategy> NumberStrategies(bool has_cmp) {
  std::vector<MutationStrategy> out = {MutationStrategy::kInteresting, MutationStrategy::kBitFlip,
                                       MutationStrategy::kByteFlip, MutationStrategy::kArith};
  if (has_cmp) out.push_back(MutationStrategy::kCmpLiteral);
  return out;
}

void PrefixRequest(MutationOutcome& out, PathSegment seg) {
  if (out.request) out.request->path.segments.insert(out.request->path.segments.begin(), std::move(seg));
}

}  // namespace

std::string_view MutationStrategyName(MutationStrategy s) {
  switch (s) {
    case MutationStrategy::kInteresting: return "interesting";
    case MutationStrategy::kBitFlip: return "bit-flip";
    case MutationStrategy::kByteFlip: return "byte-flip";
    case MutationStrategy::kArith: return "arith";
    case MutationStrategy::kCmpLiteral: return "cmp-literal";
    case MutationStrategy::kMutateElements: return "elements";
    case MutationStrategy::kResize: return "resize";
    case MutationStrategy::kHavocBytes: return "havoc";
    case MutationStrategy::kMutateField: return "field";
    case MutationStrategy::kSetNull: return "null";
    case MutationStrategy::kPointExisting: return "point-existing";
    case MutationStrategy::kPointFreshArray: return "point-fresh-array";
    case MutationStrategy::kPointFreshCall: return "point-fresh-call";
    case MutationStrategy::kToggleStub: return "toggle-stub";
  }
  return "?";
}

std::vector<uint64_t> InterestingValues(const PrimitiveType& prim) {
  if (!prim.variants.empty()) {
    std::vector<uint64_t> out;
    for (int64_t v : prim.variants) out.push_back(NumberFromInt(prim, v).bits);
    return out;
  }
  if (prim.is_float) {
    std::vector<double> ds = {0.0, 1.0, -1.0};
    if (prim.width_bits == 32) {
      ds.insert(ds.end(), {FLT_MAX, -FLT_MAX, FLT_MAX / 2});
    } else {
      ds.insert(ds.end(), {DBL_MAX, -DBL_MAX, DBL_MAX / 2});
    }
    std::vector<uint64_t> out;
    for (double d : ds) out.push_back(NumberFromDouble(prim, d).bits);
    return out;
  }
  uint32_t w = prim.width_bits;
  uint64_t mask = WidthMask(w);
  uint64_t max = prim.is_signed ? (mask >> 1) : mask;
  uint64_t min = prim.is_signed ? (uint64_t{1} << (w - 1)) : 0;
  std::vector<uint64_t> out = {0, 1, mask, max, min, max / 2};
  if (w == 32) out.push_back(0x80000000ull);
  if (w == 64) out.push_back(0x8000000000000000ull);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

absl::StatusOr<Value> GenerateValue(const TypeRegistry& reg, TypeId type, Rng& rng, int budget,
                                    const ValueGenConfig& cfg) {
  if (type >= reg.size()) return absl::NotFoundError("unknown type id");
  if (budget < 0) budget = 0;
  const TypeDesc& d = reg.Resolved(type);
  Value v{type, NullValue{}};
  switch (d.kind()) {
    case TypeKind::kPrimitive:
      v.payload = GenerateNumber(d.primitive(), rng, cfg);
      return v;
    case TypeKind::kArray: {
      const auto& arr = d.array();
      uint64_t len = 0;
      if (arr.fixed_len) {
        len = *arr.fixed_len;
      } else if (budget > 0) {
        len = Uniform(rng, 0, cfg.max_generated_len);
      }
      if (reg.IsPrimitive(arr.element)) {
        const PrimitiveType& prim = reg.Resolved(arr.element).primitive();
        uint64_t width = prim.width_bits / 8;
        ByteSeq bs;
        bs.bytes.resize(len * width);
        for (uint64_t i = 0; i < len; ++i) {
          WriteElem(bs.bytes, i, width, GenerateNumber(prim, rng, cfg).bits);
        }
        v.payload = std::move(bs);
        return v;
      }
      ElementList el;
      for (uint64_t i = 0; i < len; ++i) {
        auto item = GenerateValue(reg, arr.element, rng, budget - 1, cfg);
        if (!item.ok()) return item.status();
        el.items.push_back(*std::move(item));
      }
      v.payload = std::move(el);
      return v;
    }
    case TypeKind::kRecord: {
      FieldList fl;
      for (const auto& f : d.record().fields) {
        auto item = GenerateValue(reg, f.type, rng, budget - 1, cfg);
        if (!item.ok()) return item.status();
        fl.values.push_back(*std::move(item));
      }
      v.payload = std::move(fl);
      return v;
    }
    case TypeKind::kPointer:
      return v;
    case TypeKind::kFuncPtr:
      if (budget > 0) v.payload = StubHandle{};
      return v;
    case TypeKind::kOpaque:
    case TypeKind::kVoid:
      return absl::InvalidArgumentError(
          absl::StrCat("cannot generate a value of '", reg.Get(type).name, "'"));
    case TypeKind::kAlias:
      break;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("alias '", reg.Get(type).name, "' does not resolve"));
}

std::vector<MutationStrategy> ApplicableStrategies(const TypeRegistry& reg, const Value& v,
                                                   const MutationInputs& in) {
  const TypeDesc& d = reg.Resolved(v.type);
  switch (d.kind()) {
    case TypeKind::kPrimitive:
      if (!std::holds_alternative<Number>(v.payload)) return {};
      return NumberStrategies(!in.cmp_literals.empty());
    case TypeKind::kArray: {
      std::vector<MutationStrategy> out;
      if (ArrayLength(reg, v) > 0) out.push_back(MutationStrategy::kMutateElements);
      if (!d.array().fixed_len) out.push_back(MutationStrategy::kResize);
      if (std::holds_alternative<ByteSeq>(v.payload) && ArrayLength(reg, v) > 0 &&
          reg.SizeOf(d.array().element) == 1) {
        out.push_back(MutationStrategy::kHavocBytes);
      }
      return out;
    }
    case TypeKind::kRecord:
      if (d.record().fields.empty()) return {};
      return {MutationStrategy::kMutateField};
    case TypeKind::kPointer: {
      std::vector<MutationStrategy> out = {MutationStrategy::kSetNull};
      if (d.pointer().trivial) {
        if (!in.pointer_candidates.empty()) out.push_back(MutationStrategy::kPointExisting);
        if (reg.LayoutSize(d.pointer().pointee).ok()) {
          out.push_back(MutationStrategy::kPointFreshArray);
        }
      }
      out.push_back(MutationStrategy::kPointFreshCall);
      return out;
    }
    case TypeKind::kFuncPtr:
      return {MutationStrategy::kToggleStub};
    default:
      return {};
  }
}

std::optional<MutationOutcome> MutateValueWith(const TypeRegistry& reg, const Value& v,
                                               MutationStrategy strategy, Rng& rng,
                                               const MutationInputs& in,
                                               const ValueGenConfig& cfg) {
  auto applicable = ApplicableStrategies(reg, v, in);
  bool number_strategy = strategy == MutationStrategy::kCmpLiteral;
  if (std::find(applicable.begin(), applicable.end(), strategy) == applicable.end() &&
      !(number_strategy && reg.IsPrimitive(v.type))) {
    return std::nullopt;
  }
  const TypeDesc& d = reg.Resolved(v.type);
  MutationOutcome out{v, strategy, std::nullopt};
  switch (strategy) {
    case MutationStrategy::kInteresting:
    case MutationStrategy::kBitFlip:
    case MutationStrategy::kByteFlip:
    case MutationStrategy::kArith:
    case MutationStrategy::kCmpLiteral:
      out.value.payload =
          MutateNumber(d.primitive(), std::get<Number>(v.payload), strategy, rng, in.cmp_literals);
      return out;
    case MutationStrategy::kMutateElements: {
      if (auto* bs = std::get_if<ByteSeq>(&out.value.payload)) {
        const PrimitiveType& prim = reg.Resolved(d.array().element).primitive();
        uint64_t width = prim.width_bits / 8;
        uint64_t len = bs->bytes.size() / width;
        uint64_t count = Uniform(rng, 1, std::min<uint64_t>(4, len));
        auto strategies = NumberStrategies(!in.cmp_literals.empty());
        for (uint64_t k = 0; k < count; ++k) {
          uint64_t i = Uniform(rng, 0, len - 1);
          Number n{ReadElem(bs->bytes, i, width)};
          n = MutateNumber(prim, n, Pick(rng, strategies), rng, in.cmp_literals);
          WriteElem(bs->bytes, i, width, n.bits);
        }
        return out;
      }
      auto& items = std::get<ElementList>(out.value.payload).items;
      uint64_t i = Uniform(rng, 0, items.size() - 1);
      MutationOutcome inner = MutateValue(reg, items[i], rng, in, cfg);
      items[i] = std::move(inner.value);
      out.request = std::move(inner.request);
      PrefixRequest(out, PathSegment{i});
      return out;
    }
    case MutationStrategy::kResize: {
      TypeId elem = d.array().element;
      uint64_t len = ArrayLength(reg, v);
      bool grow = len == 0 || (len < cfg.max_resized_len && Coin(rng));
      if (grow) {
        uint64_t add = Uniform(rng, 1, std::min<uint64_t>(16, cfg.max_resized_len - len));
        uint64_t pos = Uniform(rng, 0, len);
        if (auto* bs = std::get_if<ByteSeq>(&out.value.payload)) {
          const PrimitiveType& prim = reg.Resolved(elem).primitive();
          uint64_t width = prim.width_bits / 8;
          std::vector<uint8_t> fresh(add * width);
          for (uint64_t k = 0; k < add; ++k) {
            WriteElem(fresh, k, width, GenerateNumber(prim, rng, cfg).bits);
          }
          bs->bytes.insert(bs->bytes.begin() + static_cast<ptrdiff_t>(pos * width), fresh.begin(),
                           fresh.end());
        } else {
          auto& items = std::get<ElementList>(out.value.payload).items;
          for (uint64_t k = 0; k < add; ++k) {
            auto item = GenerateValue(reg, elem, rng, 1, cfg);
            if (!item.ok()) break;
            items.insert(items.begin() + static_cast<ptrdiff_t>(pos), *std::move(item));
          }
        }
      } else {
        uint64_t remove = Uniform(rng, 1, std::min<uint64_t>(16, len));
        uint64_t pos = Uniform(rng, 0, len - remove);
        if (auto* bs = std::get_if<ByteSeq>(&out.value.payload)) {
          uint64_t width = reg.SizeOf(elem);
          bs->bytes.erase(bs->bytes.begin() + static_cast<ptrdiff_t>(pos * width),
                          bs->bytes.begin() + static_cast<ptrdiff_t>((pos + remove) * width));
        } else {
          auto& items = std::get<ElementList>(out.value.payload).items;
          items.erase(items.begin() + static_cast<ptrdiff_t>(pos),
                      items.begin() + static_cast<ptrdiff_t>(pos + remove));
        }
      }
      return out;
    }
    case MutationStrategy::kHavocBytes: {
      auto& bytes = std::get<ByteSeq>(out.value.payload).bytes;
      uint64_t ops = Uniform(rng, 1, 8);
      for (uint64_t k = 0; k < ops; ++k) {
        uint64_t i = Uniform(rng, 0, bytes.size() - 1);
        switch (Uniform(rng, 0, 3)) {
          case 0: bytes[i] = static_cast<uint8_t>(rng()); break;
          case 1: bytes[i] ^= static_cast<uint8_t>(1u << Uniform(rng, 0, 7)); break;
          case 2: bytes[i] = static_cast<uint8_t>(bytes[i] + Uniform(rng, 1, 35)); break;
          default: {
            static constexpr uint8_t kInteresting8[] = {0, 1, 16, 32, 64, 100, 127, 128, 255};
            bytes[i] = kInteresting8[Uniform(rng, 0, std::size(kInteresting8) - 1)];
            break;
          }
        }
      }
      return out;
    }
    case MutationStrategy::kMutateField: {
      auto& values = std::get<FieldList>(out.value.payload).values;
      uint64_t i = Uniform(rng, 0, values.size() - 1);
      MutationOutcome inner = MutateValue(reg, values[i], rng, in, cfg);
      values[i] = std::move(inner.value);
      out.request = std::move(inner.request);
      PrefixRequest(out, PathSegment{d.record().fields[i].name});
      return out;
    }
    case MutationStrategy::kSetNull:
      out.value.payload = NullValue{};
      return out;
    case MutationStrategy::kPointExisting: {
      StmtIndex target = in.pointer_candidates[Uniform(rng, 0, in.pointer_candidates.size() - 1)];
      out.value.payload = LocationRef{target, {}, true};
      return out;
    }
    case MutationStrategy::kPointFreshArray:
      out.request = MutationRequest{MutationRequest::Kind::kFreshArray, {}, v.type};
      return out;
    case MutationStrategy::kPointFreshCall:
      out.request = MutationRequest{MutationRequest::Kind::kFreshCall, {}, v.type};
      return out;
    case MutationStrategy::kToggleStub:
      if (v.is_null()) {
        out.value.payload = StubHandle{};
      } else {
        out.value.payload = NullValue{};
      }
      return out;
  }
  return std::nullopt;
}

MutationOutcome MutateValue(const TypeRegistry& reg, const Value& v, Rng& rng,
                            const MutationInputs& in, const ValueGenConfig& cfg) {
  auto strategies = ApplicableStrategies(reg, v, in);
  if (strategies.empty()) return MutationOutcome{v, MutationStrategy::kInteresting, std::nullopt};
  auto out = MutateValueWith(reg, v, Pick(rng, strategies), rng, in, cfg);
  if (!out) return MutationOutcome{v, MutationStrategy::kInteresting, std::nullopt};
  return *std::move(out);
}

uint64_t MutationPoints(const TypeRegistry& reg, const Value& v) {
  if (const auto* el = std::get_if<ElementList>(&v.payload)) {
    uint64_t n = 0;
    for (const auto& item : el->items) n += MutationPoints(reg, item);
    return n;
  }
  if (const auto* fl = std::get_if<FieldList>(&v.payload)) {
    uint64_t n = 0;
    for (const auto& item : fl->values) n += MutationPoints(reg, item);
    return n;
  }
  if (std::holds_alternative<ByteSeq>(v.payload)) return ArrayLength(reg, v);
  return 1;
}

}  // namespace apifuzz

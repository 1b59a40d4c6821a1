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

#include "apifuzz/dsl.h"

#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>

#include "absl/strings/escaping.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

#define RETURN_IF_ERROR_LOCAL(expr) \
  do {                              \
    absl::Status _st = (expr);      \
    if (!_st.ok()) return _st;      \
  } while (0)

#define ASSIGN_OR_RETURN_LOCAL(lhs, expr)        \
  auto lhs##_or = (expr);                        \
  if (!lhs##_or.ok()) return lhs##_or.status(); \
  auto lhs = std::move(*lhs##_or)

namespace apifuzz {
namespace {

// ---------------------------------------------------------------------------
// Numbers

std::string FormatNumber(const PrimitiveType& prim, Number n) {
  if (prim.is_float) {
    char buf[64];
    double d = NumberAsDouble(prim, n);
    if (!std::isfinite(d)) return absl::StrCat("0x", absl::Hex(n.bits));
    std::to_chars_result r;
    if (prim.width_bits == 32) {
      r = std::to_chars(buf, buf + sizeof(buf), static_cast<float>(d));
    } else {
      r = std::to_chars(buf, buf + sizeof(buf), d);
    }
    return std::string(buf, r.ptr);
  }
  if (prim.is_signed) return absl::StrCat(SignExtend(n.bits, prim.width_bits));
  return absl::StrCat(n.bits & WidthMask(prim.width_bits));
}

uint64_t LoadLittleEndian(const uint8_t* p, size_t width) {
  uint64_t v = 0;
  for (size_t i = 0; i < width; ++i) v |= uint64_t{p[i]} << (8 * i);
  return v;
}

void StoreLittleEndian(uint64_t v, size_t width, std::vector<uint8_t>& out) {
  for (size_t i = 0; i < width; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

// ---------------------------------------------------------------------------
// Serialization

void AppendValue(const Value& v, const TypeRegistry& reg, std::string& out);

void AppendRef(const LocationRef& r, std::string& out) {
  if (r.address_of) out.push_back('&');
  absl::StrAppend(&out, "<", r.index, ">");
  if (!r.path.empty()) absl::StrAppend(&out, "[", FieldPathToString(r.path), "]");
}

void AppendArrayPrefix(const ArrayType& arr, uint64_t n, std::string& out) {
  if (!arr.fixed_len) absl::StrAppend(&out, "vec(", n, ")");
}

void AppendValue(const Value& v, const TypeRegistry& reg, std::string& out) {
  const TypeDesc& d = reg.Resolved(v.type);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Number>) {
          out.append(FormatNumber(d.primitive(), p));
        } else if constexpr (std::is_same_v<T, ByteSeq>) {
          const auto& arr = d.array();
          const PrimitiveType& elem = reg.Resolved(arr.element).primitive();
          size_t width = elem.width_bits / 8;
          uint64_t n = p.bytes.size() / width;
          AppendArrayPrefix(arr, n, out);
          if (n > kBase64Threshold) {
            std::string_view raw(reinterpret_cast<const char*>(p.bytes.data()), p.bytes.size());
            absl::StrAppend(&out, "[\"", absl::Base64Escape(absl::string_view(raw.data(), raw.size())), "\"]");
            return;
          }
          out.push_back('[');
          for (uint64_t i = 0; i < n; ++i) {
            if (i > 0) out.append(", ");
            out.append(FormatNumber(elem, Number{LoadLittleEndian(&p.bytes[i * width], width)}));
          }
          out.push_back(']');
        } else if constexpr (std::is_same_v<T, ElementList>) {
          AppendArrayPrefix(d.array(), p.items.size(), out);
          out.push_back('[');
          for (size_t i = 0; i < p.items.size(); ++i) {
            if (i > 0) out.append(", ");
            AppendValue(p.items[i], reg, out);
          }
          out.push_back(']');
        } else if constexpr (std::is_same_v<T, FieldList>) {
          const auto& fields = d.record().fields;
          if (p.values.empty()) {
            out.append("{}");
            return;
          }
          out.append("{ ");
          for (size_t i = 0; i < p.values.size(); ++i) {
            if (i > 0) out.append(", ");
            absl::StrAppend(&out, fields[i].name, ": ");
            AppendValue(p.values[i], reg, out);
          }
          out.append(" }");
        } else if constexpr (std::is_same_v<T, NullValue>) {
          out.append("null");
        } else if constexpr (std::is_same_v<T, LocationRef>) {
          AppendRef(p, out);
        } else if constexpr (std::is_same_v<T, StubHandle>) {
          out.append("stub");
        }
      },
      v.payload);
}

std::string Idx(StmtIndex i) { return absl::StrCat("<", i, ">"); }

// ---------------------------------------------------------------------------
// Parsing

class LineCursor {
 public:
  LineCursor(std::string_view line, size_t line_no) : s_(line), line_no_(line_no) {}

  void SkipSpace() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
  }
  bool AtEnd() {
    SkipSpace();
    return pos_ >= s_.size();
  }
  char Peek() {
    SkipSpace();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  bool Consume(char c) {
    if (Peek() != c) return false;
    ++pos_;
    return true;
  }
  bool ConsumeWord(std::string_view w) {
    SkipSpace();
    if (s_.substr(pos_, w.size()) != w) return false;
    size_t end = pos_ + w.size();
    if (end < s_.size() && IsIdentChar(s_[end])) return false;
    pos_ = end;
    return true;
  }
  absl::Status Expect(char c) {
    if (Consume(c)) return absl::OkStatus();
    return Error(absl::StrCat("expected '", std::string(1, c), "'"));
  }
  absl::StatusOr<std::string> Identifier() {
    SkipSpace();
    size_t start = pos_;
    if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      while (pos_ < s_.size() && IsIdentChar(s_[pos_])) ++pos_;
    }
    if (start == pos_) return Error("expected identifier");
    return std::string(s_.substr(start, pos_ - start));
  }
  absl::StatusOr<uint64_t> Unsigned() {
    SkipSpace();
    uint64_t v = 0;
    auto r = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (r.ec != std::errc()) return Error("expected unsigned integer");
    pos_ = static_cast<size_t>(r.ptr - s_.data());
    return v;
  }
  absl::StatusOr<StmtIndex> Index() {
    RETURN_IF_ERROR_LOCAL(Expect('<'));
    auto v = Unsigned();
    if (!v.ok()) return v.status();
    if (*v > std::numeric_limits<StmtIndex>::max() - 1) return Error("statement index too large");
    RETURN_IF_ERROR_LOCAL(Expect('>'));
    return static_cast<StmtIndex>(*v);
  }
  // Text up to (not including) `stop`, trimmed.
  std::string_view Until(char stop) {
    SkipSpace();
    size_t end = s_.find(stop, pos_);
    if (end == std::string_view::npos) end = s_.size();
    std::string_view out = s_.substr(pos_, end - pos_);
    pos_ = end;
    while (!out.empty() && (out.back() == ' ' || out.back() == '\t')) out.remove_suffix(1);
    return out;
  }
  // A numeric token: sign, digits, letters, '.', and exponent signs.
  std::string_view NumberToken() {
    SkipSpace();
    size_t start = pos_;
    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      bool exp_sign = (c == '-' || c == '+') && pos_ > start &&
                      (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E') &&
                      !(s_.substr(start).starts_with("0x") || s_.substr(start).starts_with("-0x"));
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || exp_sign) {
        ++pos_;
      } else {
        break;
      }
    }
    return s_.substr(start, pos_ - start);
  }
  absl::StatusOr<std::string> QuotedString() {
    RETURN_IF_ERROR_LOCAL(Expect('"'));
    size_t end = s_.find('"', pos_);
    if (end == std::string_view::npos) return Error("unterminated string");
    std::string out(s_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }

  absl::Status Error(std::string_view msg) const {
    return absl::InvalidArgumentError(
        absl::StrCat("line ", line_no_, ", column ", pos_ + 1, ": ", std::string(msg)));
  }
  size_t pos() const { return pos_; }
  void set_pos(size_t p) { pos_ = p; }

 private:
  static bool IsIdentChar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }
  std::string_view s_;
  size_t line_no_;
  size_t pos_ = 0;
};

absl::StatusOr<Number> ParseNumber(LineCursor& c, const PrimitiveType& prim) {
  size_t start = c.pos();
  std::string_view tok = c.NumberToken();
  auto fail = [&](std::string_view why) {
    c.set_pos(start);
    return c.Error(why);
  };
  if (tok.empty()) return fail("expected number");
  bool neg = tok.front() == '-';
  std::string_view body = tok;
  if (body.front() == '-' || body.front() == '+') body.remove_prefix(1);
  bool hex = body.starts_with("0x") || body.starts_with("0X");
  if (hex) {
    uint64_t v = 0;
    std::string_view digits = body.substr(2);
    auto r = std::from_chars(digits.data(), digits.data() + digits.size(), v, 16);
    if (r.ec != std::errc() || r.ptr != digits.data() + digits.size() || digits.empty()) {
      return fail(absl::StrCat("bad number '", std::string(tok), "'"));
    }
    if (prim.is_float) {
      if (neg || (v & ~WidthMask(prim.width_bits)) != 0) return fail("float bit pattern out of range");
      return Number{v};
    }
    if ((v & ~WidthMask(prim.width_bits)) != 0) return fail(absl::StrCat("'", std::string(tok), "' does not fit"));
    return Number{neg ? (0 - v) & WidthMask(prim.width_bits) : v};
  }
  if (prim.is_float) {
    double d = 0;
    auto r = std::from_chars(tok.data(), tok.data() + tok.size(), d);
    if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) {
      return fail(absl::StrCat("bad number '", std::string(tok), "'"));
    }
    if (prim.width_bits == 32) {
      float f = 0;
      auto rf = std::from_chars(tok.data(), tok.data() + tok.size(), f);
      if (rf.ec != std::errc()) return fail(absl::StrCat("'", std::string(tok), "' does not fit"));
      d = f;
    }
    return NumberFromDouble(prim, d);
  }
  if (neg) {
    int64_t v = 0;
    auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) {
      return fail(absl::StrCat("bad number '", std::string(tok), "'"));
    }
    int64_t min = prim.width_bits >= 64 ? std::numeric_limits<int64_t>::min()
                                        : -(int64_t{1} << (prim.width_bits - 1));
    if (v < min) return fail(absl::StrCat("'", std::string(tok), "' does not fit"));
    return NumberFromInt(prim, v);
  }
  uint64_t v = 0;
  auto r = std::from_chars(body.data(), body.data() + body.size(), v);
  if (r.ec != std::errc() || r.ptr != body.data() + body.size()) {
    return fail(absl::StrCat("bad number '", std::string(tok), "'"));
  }
  if ((v & ~WidthMask(prim.width_bits)) != 0) return fail(absl::StrCat("'", std::string(tok), "' does not fit"));
  return Number{v};
}

absl::StatusOr<FieldPath> ParsePath(LineCursor& c) {
  FieldPath path;
  if (!c.Consume('[')) return path;
  do {
    if (std::isdigit(static_cast<unsigned char>(c.Peek()))) {
      ASSIGN_OR_RETURN_LOCAL(n, c.Unsigned());
      path.segments.emplace_back(n);
    } else {
      ASSIGN_OR_RETURN_LOCAL(name, c.Identifier());
      path.segments.emplace_back(std::move(name));
    }
  } while (c.Consume('.'));
  RETURN_IF_ERROR_LOCAL(c.Expect(']'));
  return path;
}

absl::StatusOr<Value> ParseValue(LineCursor& c, const TypeRegistry& reg, TypeId type, int depth);

absl::StatusOr<Value> ParseArray(LineCursor& c, const TypeRegistry& reg, TypeId type, int depth) {
  const TypeDesc& d = reg.Resolved(type);
  const ArrayType& arr = d.array();
  std::optional<uint64_t> declared;
  if (c.ConsumeWord("vec")) {
    RETURN_IF_ERROR_LOCAL(c.Expect('('));
    ASSIGN_OR_RETURN_LOCAL(n, c.Unsigned());
    declared = n;
    RETURN_IF_ERROR_LOCAL(c.Expect(')'));
  }
  RETURN_IF_ERROR_LOCAL(c.Expect('['));
  Value out{type, NullValue{}};
  uint64_t count = 0;
  bool primitive = reg.IsPrimitiveArray(type);
  if (primitive) {
    const PrimitiveType& elem = reg.Resolved(arr.element).primitive();
    size_t width = elem.width_bits / 8;
    ByteSeq seq;
    if (c.Peek() == '"') {
      ASSIGN_OR_RETURN_LOCAL(text, c.QuotedString());
      std::string raw;
      if (!absl::Base64Unescape(text, &raw)) return c.Error("invalid Base64 payload");
      if (raw.size() % width != 0) return c.Error("Base64 payload is not a whole number of elements");
      seq.bytes.assign(raw.begin(), raw.end());
      count = raw.size() / width;
    } else if (c.Peek() != ']') {
      do {
        ASSIGN_OR_RETURN_LOCAL(n, ParseNumber(c, elem));
        StoreLittleEndian(n.bits, width, seq.bytes);
        ++count;
      } while (c.Consume(','));
    }
    out.payload = std::move(seq);
  } else {
    ElementList list;
    if (c.Peek() != ']') {
      do {
        ASSIGN_OR_RETURN_LOCAL(item, ParseValue(c, reg, arr.element, depth + 1));
        list.items.push_back(std::move(item));
      } while (c.Consume(','));
    }
    count = list.items.size();
    out.payload = std::move(list);
  }
  RETURN_IF_ERROR_LOCAL(c.Expect(']'));
  if (declared && *declared != count) {
    return c.Error(absl::StrCat("vec(", *declared, ") holds ", count, " elements"));
  }
  if (arr.fixed_len && *arr.fixed_len != count) {
    return c.Error(absl::StrCat("'", d.name, "' needs ", *arr.fixed_len, " elements, got ", count));
  }
  return out;
}

absl::StatusOr<Value> ParseRecord(LineCursor& c, const TypeRegistry& reg, TypeId type, int depth) {
  const TypeDesc& d = reg.Resolved(type);
  const auto& fields = d.record().fields;
  RETURN_IF_ERROR_LOCAL(c.Expect('{'));
  std::vector<std::optional<Value>> slots(fields.size());
  if (c.Peek() != '}') {
    do {
      ASSIGN_OR_RETURN_LOCAL(name, c.Identifier());
      size_t k = 0;
      while (k < fields.size() && fields[k].name != name) ++k;
      if (k == fields.size()) return c.Error(absl::StrCat("'", d.name, "' has no field '", name, "'"));
      if (slots[k]) return c.Error(absl::StrCat("field '", name, "' given twice"));
      RETURN_IF_ERROR_LOCAL(c.Expect(':'));
      ASSIGN_OR_RETURN_LOCAL(v, ParseValue(c, reg, fields[k].type, depth + 1));
      slots[k] = std::move(v);
    } while (c.Consume(','));
  }
  RETURN_IF_ERROR_LOCAL(c.Expect('}'));
  FieldList fl;
  for (size_t k = 0; k < fields.size(); ++k) {
    if (!slots[k]) return c.Error(absl::StrCat("missing field '", fields[k].name, "'"));
    fl.values.push_back(std::move(*slots[k]));
  }
  return Value{type, std::move(fl)};
}

absl::StatusOr<Value> ParseValue(LineCursor& c, const TypeRegistry& reg, TypeId type, int depth) {
  if (depth > 64) return c.Error("value nested too deeply");
  const TypeDesc& d = reg.Resolved(type);
  TypeKind kind = d.kind();
  auto mismatch = [&](std::string_view what) {
    return c.Error(absl::StrCat(std::string(what), " is not a valid '", reg.Get(type).name, "'"));
  };
  if (c.ConsumeWord("null")) {
    if (kind != TypeKind::kPointer && kind != TypeKind::kFuncPtr) return mismatch("null");
    return Value{type, NullValue{}};
  }
  if (c.ConsumeWord("stub")) {
    if (kind != TypeKind::kFuncPtr) return mismatch("stub");
    return Value{type, StubHandle{}};
  }
  if (c.Peek() == '&' || c.Peek() == '<') {
    LocationRef ref;
    ref.address_of = c.Consume('&');
    if (ref.address_of && kind != TypeKind::kPointer) return mismatch("an address");
    ASSIGN_OR_RETURN_LOCAL(idx, c.Index());
    ref.index = idx;
    ASSIGN_OR_RETURN_LOCAL(path, ParsePath(c));
    ref.path = std::move(path);
    return Value{type, std::move(ref)};
  }
  switch (kind) {
    case TypeKind::kPrimitive: {
      ASSIGN_OR_RETURN_LOCAL(n, ParseNumber(c, d.primitive()));
      return Value{type, n};
    }
    case TypeKind::kArray:
      return ParseArray(c, reg, type, depth);
    case TypeKind::kRecord:
      return ParseRecord(c, reg, type, depth);
    case TypeKind::kPointer:
    case TypeKind::kFuncPtr:
      return mismatch("literal");
    default:
      return c.Error(absl::StrCat("cannot load a value of type '", reg.Get(type).name, "'"));
  }
}

// Removes a `//` comment that is not inside a string literal.
std::string_view StripComment(std::string_view line) {
  bool in_string = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (!in_string && line[i] == '/' && i + 1 < line.size() && line[i + 1] == '/') {
      return line.substr(0, i);
    }
  }
  return line;
}

absl::Status CheckBackRef(LineCursor& c, StmtIndex ref, StmtIndex self) {
  if (ref >= self) return c.Error(absl::StrCat("forward reference to <", ref, "> from <", self, ">"));
  return absl::OkStatus();
}

absl::StatusOr<Statement> ParseStatement(LineCursor& c, const TypeRegistry& reg) {
  Statement st;
  ASSIGN_OR_RETURN_LOCAL(index, c.Index());
  st.index = index;
  if (c.ConsumeWord("load")) {
    std::string_view spelling = c.Until('=');
    if (spelling.empty()) return c.Error("expected type");
    auto type = reg.Lookup(spelling);
    if (!type) return c.Error(absl::StrCat("unknown type '", std::string(spelling), "'"));
    RETURN_IF_ERROR_LOCAL(c.Expect('='));
    ASSIGN_OR_RETURN_LOCAL(value, ParseValue(c, reg, *type, 0));
    absl::Status bad;
    ForEachRef(value, [&](const LocationRef& r) {
      if (bad.ok()) bad = CheckBackRef(c, r.index, index);
    });
    RETURN_IF_ERROR_LOCAL(bad);
    st.body = LoadStmt{*type, std::move(value)};
  } else if (c.ConsumeWord("call")) {
    CallStmt call;
    size_t save = c.pos();
    ASSIGN_OR_RETURN_LOCAL(first, c.Identifier());
    if ((first == "target" || first == "relative") && c.Consume(':')) {
      call.role = first == "target" ? CallRole::kTarget : CallRole::kRelative;
      ASSIGN_OR_RETURN_LOCAL(name, c.Identifier());
      call.name = std::move(name);
    } else {
      c.set_pos(save);
      ASSIGN_OR_RETURN_LOCAL(name, c.Identifier());
      call.name = std::move(name);
    }
    call.tracked = c.Consume('?');
    RETURN_IF_ERROR_LOCAL(c.Expect('('));
    if (c.Peek() != ')') {
      do {
        ASSIGN_OR_RETURN_LOCAL(a, c.Index());
        RETURN_IF_ERROR_LOCAL(CheckBackRef(c, a, index));
        call.args.push_back(a);
      } while (c.Consume(','));
    }
    RETURN_IF_ERROR_LOCAL(c.Expect(')'));
    st.body = std::move(call);
  } else if (c.ConsumeWord("update")) {
    UpdateStmt u;
    ASSIGN_OR_RETURN_LOCAL(dst, c.Index());
    RETURN_IF_ERROR_LOCAL(CheckBackRef(c, dst, index));
    ASSIGN_OR_RETURN_LOCAL(path, ParsePath(c));
    RETURN_IF_ERROR_LOCAL(c.Expect('='));
    ASSIGN_OR_RETURN_LOCAL(src, c.Index());
    RETURN_IF_ERROR_LOCAL(CheckBackRef(c, src, index));
    u.dst = dst;
    u.path = std::move(path);
    u.src = src;
    st.body = std::move(u);
  } else if (c.ConsumeWord("assert")) {
    AssertStmt a;
    if (c.ConsumeWord("non_null")) {
      a.rule = AssertStmt::Rule::kNonNull;
    } else if (c.ConsumeWord("eq")) {
      a.rule = AssertStmt::Rule::kEq;
    } else {
      return c.Error("expected non_null or eq");
    }
    RETURN_IF_ERROR_LOCAL(c.Expect('('));
    ASSIGN_OR_RETURN_LOCAL(lhs, c.Index());
    RETURN_IF_ERROR_LOCAL(CheckBackRef(c, lhs, index));
    a.lhs = lhs;
    if (a.rule == AssertStmt::Rule::kEq) {
      RETURN_IF_ERROR_LOCAL(c.Expect(','));
      ASSIGN_OR_RETURN_LOCAL(rhs, c.Index());
      RETURN_IF_ERROR_LOCAL(CheckBackRef(c, rhs, index));
      a.rhs = rhs;
    }
    // A missing closing parenthesis at the end of the line is tolerated.
    if (!c.Consume(')') && !c.AtEnd()) return c.Error("expected ')'");
    st.body = a;
  } else if (c.ConsumeWord("file")) {
    FileStmt f;
    if (c.ConsumeWord("read")) {
      f.mode = FileMode::kRead;
    } else if (c.ConsumeWord("write")) {
      f.mode = FileMode::kWrite;
    } else if (c.ConsumeWord("option")) {
      f.mode = FileMode::kRead;
      f.spelled_option = true;
    } else {
      return c.Error("expected read, write or option");
    }
    if (c.Peek() == '<') {
      ASSIGN_OR_RETURN_LOCAL(src, c.Index());
      RETURN_IF_ERROR_LOCAL(CheckBackRef(c, src, index));
      f.source = src;
    }
    st.body = f;
  } else {
    return c.Error("expected load, call, update, assert or file");
  }
  if (!c.AtEnd()) return c.Error("unexpected trailing text");
  return st;
}

// ---------------------------------------------------------------------------
// Validation

class Validator {
 public:
  Validator(const Program& p, const Manifest& m) : p_(p), m_(m), reg_(m.types()) {}

  std::vector<Diagnostic> Run() {
    if (auto st = p_.CheckStructure(); !st.ok()) {
      diags_.push_back({0, std::string(st.message())});
      return diags_;
    }
    for (size_t pos = 0; pos < p_.size(); ++pos) {
      cur_ = p_[pos].index;
      std::visit([&](const auto& body) { Check(body); }, p_[pos].body);
    }
    return diags_;
  }

 private:
  void Report(std::string msg) { diags_.push_back({cur_, std::move(msg)}); }

  std::optional<TypeId> TypeOf(StmtIndex i) {
    auto pos = p_.PositionOf(i);
    if (!pos) return std::nullopt;
    return ProducedType(p_, *pos, m_);
  }

  std::string Name(TypeId t) const { return reg_.Get(t).name; }

  void CheckRefs(const Value& v) {
    if (const auto* ref = std::get_if<LocationRef>(&v.payload)) {
      auto produced = TypeOf(ref->index);
      if (!produced) {
        Report(absl::StrCat(Idx(ref->index), " produces no value"));
        return;
      }
      auto place = PathType(reg_, *produced, ref->path);
      if (!place.ok()) {
        Report(std::string(place.status().message()));
        return;
      }
      if (!ref->address_of) {
        if (!reg_.Same(v.type, *place)) {
          Report(absl::StrCat("copy of '", Name(*place), "' into '", Name(v.type), "'"));
        }
        return;
      }
      if (!reg_.IsPointer(v.type)) {
        Report(absl::StrCat("address stored in non-pointer '", Name(v.type), "'"));
        return;
      }
      TypeId pointee = reg_.Resolved(v.type).pointer().pointee;
      if (reg_.IsVoid(pointee) || reg_.Same(pointee, *place)) return;
      const TypeDesc& pd = reg_.Resolved(*place);
      if (pd.kind() == TypeKind::kArray && reg_.Same(pd.array().element, pointee)) return;
      Report(absl::StrCat("'", Name(v.type), "' cannot point to '", Name(*place), "'"));
      return;
    }
    if (const auto* el = std::get_if<ElementList>(&v.payload)) {
      for (const auto& item : el->items) CheckRefs(item);
    } else if (const auto* fl = std::get_if<FieldList>(&v.payload)) {
      for (const auto& item : fl->values) CheckRefs(item);
    }
  }

  void Check(const LoadStmt& load) {
    if (auto st = CheckValue(reg_, load.value); !st.ok()) {
      Report(std::string(st.message()));
      return;
    }
    if (!reg_.Same(load.type, load.value.type)) Report("load value type differs from declared type");
    CheckRefs(load.value);
  }

  void Check(const CallStmt& call) {
    const FuncSig* sig = m_.FindFunction(call.name);
    if (sig == nullptr) {
      Report(absl::StrCat("unknown function '", call.name, "'"));
      return;
    }
    if (sig->params.size() != call.args.size()) {
      Report(absl::StrCat("'", call.name, "' takes ", sig->params.size(), " arguments, got ",
                          call.args.size()));
      return;
    }
    for (size_t k = 0; k < call.args.size(); ++k) {
      auto t = TypeOf(call.args[k]);
      TypeId want = sig->params[k].type;
      if (!t) {
        Report(absl::StrCat("argument ", k, " ", Idx(call.args[k]), " produces no value"));
      } else if (!ArgCompatible(want, *t)) {
        Report(absl::StrCat("argument ", k, " of '", call.name, "' needs '", Name(want), "', got '",
                            Name(*t), "'"));
      }
    }
  }

  bool ArgCompatible(TypeId param, TypeId arg) const {
    if (reg_.Same(param, arg)) return true;
    return reg_.IsPointer(param) && reg_.IsVoid(reg_.Resolved(param).pointer().pointee) &&
           reg_.IsPointer(arg);
  }

  void Check(const UpdateStmt& u) {
    auto pos = p_.PositionOf(u.dst);
    if (!pos || !p_[*pos].is_call()) {
      Report(absl::StrCat("update target ", Idx(u.dst), " is not a call"));
      return;
    }
    auto dst = ProducedType(p_, *pos, m_);
    if (!dst) {
      Report(absl::StrCat(Idx(u.dst), " produces no value"));
      return;
    }
    auto place = PathType(reg_, *dst, u.path);
    if (!place.ok()) {
      Report(std::string(place.status().message()));
      return;
    }
    auto src = TypeOf(u.src);
    if (!src) {
      Report(absl::StrCat(Idx(u.src), " produces no value"));
      return;
    }
    if (reg_.Same(*place, *src)) return;
    if (reg_.IsPointer(*place) && reg_.Same(reg_.Resolved(*place).pointer().pointee, *src)) return;
    Report(absl::StrCat("cannot store '", Name(*src), "' into '", Name(*place), "'"));
  }

  void Check(const AssertStmt& a) {
    auto lhs = TypeOf(a.lhs);
    if (!lhs) {
      Report(absl::StrCat(Idx(a.lhs), " produces no value"));
      return;
    }
    if (a.rule == AssertStmt::Rule::kNonNull) {
      if (!reg_.IsPointer(*lhs)) Report(absl::StrCat("non_null on non-pointer '", Name(*lhs), "'"));
      return;
    }
    auto rhs = TypeOf(a.rhs);
    if (!rhs) {
      Report(absl::StrCat(Idx(a.rhs), " produces no value"));
      return;
    }
    if (!reg_.IsPrimitive(*lhs) || !reg_.Same(*lhs, *rhs)) {
      Report(absl::StrCat("eq needs two equal primitive types, got '", Name(*lhs), "' and '",
                          Name(*rhs), "'"));
    }
  }

  void Check(const FileStmt& f) {
    if (!f.source) return;
    auto pos = p_.PositionOf(*f.source);
    if (!pos || !p_[*pos].is_load() || !reg_.IsPrimitiveArray(p_[*pos].load().type)) {
      Report(absl::StrCat("file content ", Idx(*f.source), " is not a loaded byte array"));
    }
  }

  const Program& p_;
  const Manifest& m_;
  const TypeRegistry& reg_;
  StmtIndex cur_ = 0;
  std::vector<Diagnostic> diags_;
};

// ---------------------------------------------------------------------------
// C translation

class CWriter {
 public:
  CWriter(const Program& p, const Manifest& m) : p_(p), m_(m), reg_(m.types()) {}

  std::string Run() {
    std::string body;
    for (size_t pos = 0; pos < p_.size(); ++pos) {
      const Statement& s = p_[pos];
      std::visit([&](const auto& b) { Emit(s.index, b, body); }, s.body);
    }
    std::string out;
    absl::StrAppend(&out, "// Reproducer for ", m_.library(), ".\n");
    absl::StrAppend(&out, "#include <math.h>\n#include <stdint.h>\n#include <stdio.h>\n",
                    "#include <stdlib.h>\n#include <string.h>\n\n");
    absl::StrAppend(&out, "#include \"", m_.library(), ".h\"\n\n");
    if (uses_stub_) out.append("static void apifuzz_stub(void) {}\n\n");
    absl::StrAppend(&out, "int main(void) {\n", body, "  return 0;\n}\n");
    return out;
  }

 private:
  static std::string Var(StmtIndex i) { return absl::StrCat("v", i); }

  std::string CType(TypeId t) const {
    const TypeDesc& own = reg_.Get(t);
    static const std::pair<const char*, const char*> kBuiltins[] = {
        {"i8", "int8_t"},   {"i16", "int16_t"},  {"i32", "int32_t"}, {"i64", "int64_t"},
        {"u8", "uint8_t"},  {"u16", "uint16_t"}, {"u32", "uint32_t"}, {"u64", "uint64_t"},
        {"f32", "float"},   {"f64", "double"},   {"void", "void"}};
    for (const auto& [from, to] : kBuiltins) {
      if (own.name == from) return to;
    }
    switch (own.kind()) {
      case TypeKind::kPointer:
        if (own.name.ends_with("*")) return absl::StrCat(CType(own.pointer().pointee), "*");
        return own.name;
      case TypeKind::kArray:
        return absl::StrCat(CType(own.array().element), "*");
      default:
        return own.name;
    }
  }

  std::string Literal(const Value& v) {
    const TypeDesc& d = reg_.Resolved(v.type);
    return std::visit(
        [&](const auto& p) -> std::string {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Number>) {
            const PrimitiveType& prim = d.primitive();
            if (prim.is_float) {
              double x = NumberAsDouble(prim, p);
              if (std::isnan(x)) return "NAN";
              if (std::isinf(x)) return x > 0 ? "INFINITY" : "-INFINITY";
            }
            std::string s = FormatNumber(prim, p);
            if (!prim.is_float && !prim.is_signed && prim.width_bits == 64) s.append("u");
            if (!prim.is_float && prim.is_signed && prim.width_bits == 64 &&
                SignExtend(p.bits, 64) == std::numeric_limits<int64_t>::min()) {
              return "INT64_MIN";
            }
            return s;
          } else if constexpr (std::is_same_v<T, ByteSeq>) {
            const PrimitiveType& elem = reg_.Resolved(d.array().element).primitive();
            size_t width = elem.width_bits / 8;
            std::vector<std::string> items;
            for (size_t i = 0; i + width <= p.bytes.size(); i += width) {
              Value e{d.array().element, Number{LoadLittleEndian(&p.bytes[i], width)}};
              items.push_back(Literal(e));
            }
            if (items.empty()) items.push_back("0");
            return absl::StrCat("{", absl::StrJoin(items, ", "), "}");
          } else if constexpr (std::is_same_v<T, ElementList>) {
            std::vector<std::string> items;
            for (const auto& item : p.items) items.push_back(Literal(item));
            if (items.empty()) items.push_back("0");
            return absl::StrCat("{", absl::StrJoin(items, ", "), "}");
          } else if constexpr (std::is_same_v<T, FieldList>) {
            std::vector<std::string> items;
            for (size_t i = 0; i < p.values.size(); ++i) {
              items.push_back(absl::StrCat(".", d.record().fields[i].name, " = ", Literal(p.values[i])));
            }
            if (items.empty()) return "{0}";
            return absl::StrCat("{", absl::StrJoin(items, ", "), "}");
          } else if constexpr (std::is_same_v<T, NullValue>) {
            return "NULL";
          } else if constexpr (std::is_same_v<T, LocationRef>) {
            return RefExpr(p, v.type);
          } else {
            uses_stub_ = true;
            return absl::StrCat("(", CType(v.type), ")apifuzz_stub");
          }
        },
        v.payload);
  }

  // Expression for the place `path` designates inside statement `index`.
  std::string PlaceExpr(StmtIndex index, const FieldPath& path, TypeId* place_type) {
    std::string expr = Var(index);
    auto pos = p_.PositionOf(index);
    TypeId cur = pos ? ProducedType(p_, *pos, m_).value_or(kNoType) : kNoType;
    for (const auto& seg : path.segments) {
      if (const auto* idx = std::get_if<uint64_t>(&seg)) {
        absl::StrAppend(&expr, "[", *idx, "]");
      } else {
        absl::StrAppend(&expr, ".", std::get<std::string>(seg));
      }
    }
    if (cur != kNoType) {
      auto t = PathType(reg_, cur, path);
      cur = t.ok() ? *t : kNoType;
    }
    *place_type = cur;
    return expr;
  }

  std::string RefExpr(const LocationRef& r, TypeId value_type) {
    TypeId place = kNoType;
    std::string expr = PlaceExpr(r.index, r.path, &place);
    if (!r.address_of) return expr;
    bool is_array = place != kNoType && reg_.KindOf(place) == TypeKind::kArray;
    std::string addr = is_array ? expr : absl::StrCat("&", expr);
    TypeId pointee = reg_.Resolved(value_type).pointer().pointee;
    bool exact = place != kNoType &&
                 (reg_.Same(pointee, place) ||
                  (is_array && reg_.Same(reg_.Resolved(place).array().element, pointee)));
    if (exact || reg_.IsVoid(pointee)) return addr;
    return absl::StrCat("(", CType(value_type), ")", addr);
  }

  void Emit(StmtIndex i, const LoadStmt& load, std::string& out) {
    const TypeDesc& d = reg_.Resolved(load.type);
    if (d.kind() == TypeKind::kArray && !load.value.is_ref()) {
      uint64_t n = ArrayLength(reg_, load.value);
      absl::StrAppend(&out, "  ", CType(d.array().element), " ", Var(i), "[", std::max<uint64_t>(n, 1),
                      "] = ", Literal(load.value), ";\n");
      return;
    }
    absl::StrAppend(&out, "  ", CType(load.type), " ", Var(i), " = ", Literal(load.value), ";\n");
  }

  void Emit(StmtIndex i, const CallStmt& call, std::string& out) {
    std::vector<std::string> args;
    for (StmtIndex a : call.args) args.push_back(Var(a));
    std::string expr = absl::StrCat(call.name, "(", absl::StrJoin(args, ", "), ")");
    const FuncSig* sig = m_.FindFunction(call.name);
    if (sig != nullptr && !reg_.IsVoid(sig->ret)) {
      absl::StrAppend(&out, "  ", CType(sig->ret), " ", Var(i), " = ", expr, ";\n");
    } else {
      absl::StrAppend(&out, "  ", expr, ";\n");
    }
  }

  void Emit(StmtIndex, const UpdateStmt& u, std::string& out) {
    TypeId place = kNoType;
    std::string lhs = PlaceExpr(u.dst, u.path, &place);
    auto pos = p_.PositionOf(u.src);
    std::optional<TypeId> src = pos ? ProducedType(p_, *pos, m_) : std::nullopt;
    bool coerce = place != kNoType && src && !reg_.Same(place, *src) && reg_.IsPointer(place);
    absl::StrAppend(&out, "  ", lhs, " = ", coerce ? "&" : "", Var(u.src), ";\n");
  }

  void Emit(StmtIndex, const AssertStmt& a, std::string& out) {
    if (a.rule == AssertStmt::Rule::kNonNull) {
      absl::StrAppend(&out, "  if (!", Var(a.lhs), ") return 0;\n");
    } else {
      absl::StrAppend(&out, "  if (", Var(a.lhs), " != ", Var(a.rhs), ") return 0;\n");
    }
  }

  void Emit(StmtIndex i, const FileStmt& f, std::string& out) {
    std::string v = Var(i);
    absl::StrAppend(&out, "  char* ", v, " = \"files/", i, "\";\n");
    if (f.mode == FileMode::kWrite) return;
    std::string fp = absl::StrCat("f", i);
    absl::StrAppend(&out, "  {\n    FILE* ", fp, " = fopen(", v, ", \"wb\");\n");
    if (f.source) {
      auto pos = p_.PositionOf(*f.source);
      uint64_t bytes = pos ? ValueByteSize(reg_, p_[*pos].load().value) : 0;
      absl::StrAppend(&out, "    if (", fp, ") { fwrite(", Var(*f.source), ", 1, ", bytes, ", ", fp,
                      "); fclose(", fp, "); }\n");
    } else {
      absl::StrAppend(&out, "    if (", fp, ") fclose(", fp, ");\n");
    }
    out.append("  }\n");
  }

  const Program& p_;
  const Manifest& m_;
  const TypeRegistry& reg_;
  bool uses_stub_ = false;
};

}  // namespace

absl::StatusOr<Program> ParseProgram(std::string_view text, const TypeRegistry& types) {
  std::vector<Statement> statements;
  std::set<StmtIndex> seen;
  size_t line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = StripComment(text.substr(start, end - start));
    ++line_no;
    start = end + 1;
    LineCursor c(line, line_no);
    if (c.AtEnd()) continue;
    auto st = ParseStatement(c, types);
    if (!st.ok()) return st.status();
    if (!seen.insert(st->index).second) {
      return c.Error(absl::StrCat("duplicate statement index <", st->index, ">"));
    }
    if (!statements.empty() && st->index < statements.back().index) {
      return c.Error(absl::StrCat("statement <", st->index, "> out of order"));
    }
    statements.push_back(std::move(*st));
  }
  Program p(std::move(statements));
  if (auto st = p.CheckStructure(); !st.ok()) return st;
  return p;
}

std::string SerializeValue(const Value& v, const TypeRegistry& types) {
  std::string out;
  AppendValue(v, types, out);
  return out;
}

std::string SerializeStatement(const Statement& s, const TypeRegistry& types) {
  std::string out = absl::StrCat(Idx(s.index), " ");
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, LoadStmt>) {
          absl::StrAppend(&out, "load ", types.Get(b.type).name, " = ");
          AppendValue(b.value, types, out);
        } else if constexpr (std::is_same_v<T, CallStmt>) {
          out.append("call ");
          if (b.role == CallRole::kTarget) out.append("target: ");
          if (b.role == CallRole::kRelative) out.append("relative: ");
          out.append(b.name);
          if (b.tracked) out.append(" ?");
          std::vector<std::string> args;
          for (StmtIndex a : b.args) args.push_back(Idx(a));
          absl::StrAppend(&out, " (", absl::StrJoin(args, ", "), ")");
        } else if constexpr (std::is_same_v<T, UpdateStmt>) {
          absl::StrAppend(&out, "update ", Idx(b.dst));
          if (!b.path.empty()) absl::StrAppend(&out, "[", FieldPathToString(b.path), "]");
          absl::StrAppend(&out, " = ", Idx(b.src));
        } else if constexpr (std::is_same_v<T, AssertStmt>) {
          if (b.rule == AssertStmt::Rule::kNonNull) {
            absl::StrAppend(&out, "assert non_null(", Idx(b.lhs), ")");
          } else {
            absl::StrAppend(&out, "assert eq(", Idx(b.lhs), ", ", Idx(b.rhs), ")");
          }
        } else if constexpr (std::is_same_v<T, FileStmt>) {
          out.append("file ");
          out.append(b.spelled_option ? "option" : b.mode == FileMode::kRead ? "read" : "write");
          if (b.source) absl::StrAppend(&out, " ", Idx(*b.source));
        }
      },
      s.body);
  return out;
}

std::string SerializeProgram(const Program& p, const TypeRegistry& types) {
  std::string out;
  for (const auto& s : p.statements()) {
    out.append(SerializeStatement(s, types));
    out.push_back('\n');
  }
  return out;
}

std::string FormatDiagnostics(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) absl::StrAppend(&out, Idx(d.index), ": ", d.message, "\n");
  return out;
}

std::vector<Diagnostic> ValidateProgram(const Program& p, const Manifest& m) {
  return Validator(p, m).Run();
}

absl::StatusOr<std::string> TranslateToC(const Program& p, const Manifest& m) {
  auto diags = ValidateProgram(p, m);
  if (!diags.empty()) {
    return absl::InvalidArgumentError(absl::StrCat("invalid program:\n", FormatDiagnostics(diags)));
  }
  return CWriter(p, m).Run();
}

}  // namespace apifuzz

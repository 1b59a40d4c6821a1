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


#include "interpreter.h"

#include <cstring>
#include <fstream>
#include <random>

#include "absl/strings/str_cat.h"

namespace apifuzz {

void Interpreter::Exit(ExitKind kind, StmtIndex stmt) {
  fb_.exit().exit = static_cast<uint32_t>(kind);
  fb_.exit().stmt = stmt;
}

uint64_t Interpreter::ByteSizeOf(TypeId t) const {
  auto size = reg_.LayoutSize(t);
  return size.ok() ? *size : 0;
}

std::optional<GuardedBlock> Interpreter::Alloc(StmtIndex stmt, uint64_t size) {
  auto b = mem_.AllocGuarded(size);
  if (!b) return std::nullopt;
  fb_.NoteRegion(stmt, b->base, b->size);
  fb_.NoteGuard(b->guard_base, b->guard_size);
  return b;
}

std::optional<std::pair<uint64_t, TypeId>> Interpreter::PlaceAddress(StmtIndex index,
                                                                    const FieldPath& path) {
  auto pos = p_->PositionOf(index);
  if (!pos || slot_[*pos] == 0) return std::nullopt;
  uint64_t addr = slot_[*pos];
  TypeId type = slot_type_[*pos];
  for (const auto& seg : path.segments) {
    const TypeDesc& d = reg_.Resolved(type);
    if (const auto* i = std::get_if<uint64_t>(&seg)) {
      if (d.kind() == TypeKind::kArray) {
        type = d.array().element;
        addr += *i * ByteSizeOf(type);
      } else if (d.kind() == TypeKind::kPointer) {
        uint64_t target = 0;
        if (!mem_.SafeRead(addr, &target, kPointerBytes) || target == 0) return std::nullopt;
        type = d.pointer().pointee;
        addr = target + *i * std::max<uint64_t>(1, ByteSizeOf(type));
      } else {
        return std::nullopt;
      }
    } else {
      if (d.kind() != TypeKind::kRecord) return std::nullopt;
      const auto& name = std::get<std::string>(seg);
      const RecordField* field = nullptr;
      for (const auto& f : d.record().fields) {
        if (f.name == name) field = &f;
      }
      if (field == nullptr) return std::nullopt;
      addr += field->offset;
      type = field->type;
    }
  }
  return std::make_pair(addr, type);
}

bool Interpreter::WriteValue(uint64_t address, const Value& v) {
  const TypeDesc& d = reg_.Resolved(v.type);
  if (const auto* n = std::get_if<Number>(&v.payload)) {
    uint64_t width = d.kind() == TypeKind::kPrimitive ? d.primitive().width_bits / 8 : 8;
    return mem_.SafeWrite(address, &n->bits, width);
  }
  if (const auto* bs = std::get_if<ByteSeq>(&v.payload)) {
    return bs->bytes.empty() || mem_.SafeWrite(address, bs->bytes.data(), bs->bytes.size());
  }
  if (const auto* el = std::get_if<ElementList>(&v.payload)) {
    uint64_t es = d.kind() == TypeKind::kArray ? ByteSizeOf(d.array().element) : 0;
    for (size_t i = 0; i < el->items.size(); ++i) {
      if (!WriteValue(address + i * es, el->items[i])) return false;
    }
    return true;
  }
  if (const auto* fl = std::get_if<FieldList>(&v.payload)) {
    if (d.kind() != TypeKind::kRecord) return false;
    const auto& fields = d.record().fields;
    for (size_t i = 0; i < fields.size() && i < fl->values.size(); ++i) {
      if (!WriteValue(address + fields[i].offset, fl->values[i])) return false;
    }
    return true;
  }
  if (v.is_null()) {
    uint64_t zero = 0;
    return mem_.SafeWrite(address, &zero, kPointerBytes);
  }
  if (std::holds_alternative<StubHandle>(v.payload)) {
    uint64_t stub = mem_.StubAddress();
    return mem_.SafeWrite(address, &stub, kPointerBytes);
  }
  const auto& ref = std::get<LocationRef>(v.payload);
  auto place = PlaceAddress(ref.index, ref.path);
  if (!place) return false;
  if (ref.address_of) return mem_.SafeWrite(address, &place->first, kPointerBytes);
  uint64_t size = ByteSizeOf(v.type);
  std::vector<uint8_t> buf(size);
  return mem_.SafeRead(place->first, buf.data(), size) && mem_.SafeWrite(address, buf.data(), size);
}

bool Interpreter::RunLoad(const Statement& s) {
  const auto& load = s.load();
  auto block = Alloc(s.index, ValueByteSize(reg_, load.value));
  if (!block) {
    Exit(ExitKind::kOom, s.index);
    return false;
  }
  size_t pos = *p_->PositionOf(s.index);
  slot_[pos] = block->base;
  slot_type_[pos] = load.type;
  if (!WriteValue(block->base, load.value)) {
    Exit(ExitKind::kAssertFailed, s.index);
    return false;
  }
  return true;
}

bool Interpreter::RunCall(const Statement& s) {
  const auto& call = std::get<CallStmt>(s.body);
  auto fn_index = m_.FunctionIndex(call.name);
  if (!fn_index || call.args.size() != m_.functions()[*fn_index].params.size()) {
    Exit(ExitKind::kAssertFailed, s.index);
    return false;
  }
  const FuncSig& sig = m_.functions()[*fn_index];
  std::vector<uint64_t> words(call.args.size(), 0);
  for (size_t k = 0; k < call.args.size(); ++k) {
    auto pos = p_->PositionOf(call.args[k]);
    if (!pos || slot_[*pos] == 0) {
      Exit(ExitKind::kAssertFailed, s.index);
      return false;
    }
    TypeId pt = sig.params[k].type;
    TypeKind kind = reg_.KindOf(pt);
    if (kind == TypeKind::kPrimitive || kind == TypeKind::kPointer || kind == TypeKind::kFuncPtr) {
      uint64_t width = std::min<uint64_t>(8, ByteSizeOf(pt));
      if (!mem_.SafeRead(slot_[*pos], &words[k], width)) {
        Exit(ExitKind::kAssertFailed, s.index);
        return false;
      }
    } else {
      words[k] = slot_[*pos];
    }
    if (kind == TypeKind::kPointer && words[k] != 0 && mem_.InFreedChunk(words[k])) {
      Exit(ExitKind::kUseAfterFree, s.index);
      return false;
    }
  }
  for (size_t k = 0; k < words.size(); ++k) {
    if (!reg_.IsStringPointer(sig.params[k].type) || words[k] == 0) continue;
    std::string str;
    char c = 0;
    while (str.size() < kEventNameBytes && mem_.SafeRead(words[k] + str.size(), &c, 1) && c != 0) {
      str.push_back(c);
    }
    fb_.NoteArgString(s.index, k, str);
  }

  fb_.BeginCall(s.index, static_cast<uint32_t>(*fn_index), call.name, call.tracked);
  uint64_t ret = invoker_.Invoke(*fn_index, words);
  fb_.EndCall(ret);

  if (reg_.IsVoid(sig.ret)) return true;
  uint64_t size = std::min<uint64_t>(8, ByteSizeOf(sig.ret));
  auto block = Alloc(s.index, size);
  if (!block) {
    Exit(ExitKind::kOom, s.index);
    return false;
  }
  mem_.SafeWrite(block->base, &ret, size);
  size_t pos = *p_->PositionOf(s.index);
  slot_[pos] = block->base;
  slot_type_[pos] = sig.ret;
  return true;
}

bool Interpreter::RunUpdate(const Statement& s) {
  const auto& up = std::get<UpdateStmt>(s.body);
  auto place = PlaceAddress(up.dst, up.path);
  auto src_pos = p_->PositionOf(up.src);
  if (!place || !src_pos || slot_[*src_pos] == 0) {
    Exit(ExitKind::kAssertFailed, s.index);
    return false;
  }
  uint64_t src = slot_[*src_pos];
  TypeId src_type = slot_type_[*src_pos];
  const TypeDesc& pd = reg_.Resolved(place->second);
  bool ok = false;
  if (pd.kind() == TypeKind::kPointer && !reg_.Same(place->second, src_type) &&
      reg_.Same(pd.pointer().pointee, src_type)) {
    ok = mem_.SafeWrite(place->first, &src, kPointerBytes);
  } else {
    uint64_t size = ByteSizeOf(place->second);
    std::vector<uint8_t> buf(size);
    ok = mem_.SafeRead(src, buf.data(), size) && mem_.SafeWrite(place->first, buf.data(), size);
  }
  if (!ok) Exit(ExitKind::kAssertFailed, s.index);
  return ok;
}

bool Interpreter::RunAssert(const Statement& s) {
  const auto& a = std::get<AssertStmt>(s.body);
  auto lhs = p_->PositionOf(a.lhs);
  if (!lhs || slot_[*lhs] == 0) {
    Exit(ExitKind::kAssertFailed, s.index);
    return false;
  }
  bool holds = false;
  if (a.rule == AssertStmt::Rule::kNonNull) {
    uint64_t v = 0;
    holds = mem_.SafeRead(slot_[*lhs], &v, kPointerBytes) && v != 0;
  } else {
    auto rhs = p_->PositionOf(a.rhs);
    if (rhs && slot_[*rhs] != 0) {
      uint64_t size = std::min<uint64_t>(8, ByteSizeOf(slot_type_[*lhs]));
      uint64_t x = 0;
      uint64_t y = 0;
      holds = mem_.SafeRead(slot_[*lhs], &x, size) && mem_.SafeRead(slot_[*rhs], &y, size) && x == y;
    }
  }
  if (!holds) Exit(ExitKind::kAssertFailed, s.index);
  return holds;
}

bool Interpreter::RunFile(const Statement& s) {
  const auto& f = std::get<FileStmt>(s.body);
  std::string path = absl::StrCat(files_dir_, "/", s.index);
  if (f.mode == FileMode::kRead) {
    std::string content;
    const Statement* src = nullptr;
    if (f.source) {
      if (auto pos = p_->PositionOf(*f.source)) src = &(*p_)[*pos];
    }
    if (src != nullptr && src->is_load()) {
      if (const auto* bs = std::get_if<ByteSeq>(&src->load().value.payload)) {
        content.assign(bs->bytes.begin(), bs->bytes.end());
      }
    } else {
      std::mt19937_64 rng(cfg_.rng_seed ^ (0x9e3779b97f4a7c15ull * (s.index + 1)));
      size_t len = rng() % 65;
      for (size_t i = 0; i < len; ++i) content.push_back(static_cast<char>(rng() & 0xff));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
  } else {
    std::remove(path.c_str());
  }
  auto str = Alloc(s.index, path.size() + 1);
  auto slot = Alloc(s.index, kPointerBytes);
  if (!str || !slot) {
    Exit(ExitKind::kOom, s.index);
    return false;
  }
  mem_.SafeWrite(str->base, path.c_str(), path.size() + 1);
  mem_.SafeWrite(slot->base, &str->base, kPointerBytes);
  size_t pos = *p_->PositionOf(s.index);
  slot_[pos] = slot->base;
  slot_type_[pos] = reg_.CharPtrType();
  return true;
}

void Interpreter::Run(const Program& p) {
  p_ = &p;
  slot_.assign(p.size(), 0);
  slot_type_.assign(p.size(), kNoType);
  Exit(ExitKind::kOk, 0);
  for (const Statement& s : p.statements()) {
    bool go = true;
    switch (s.body.index()) {
      case 0: go = RunLoad(s); break;
      case 1: go = RunCall(s); break;
      case 2: go = RunUpdate(s); break;
      case 3: go = RunAssert(s); break;
      case 4: go = RunFile(s); break;
    }
    if (!go) return;
  }
}

}  // namespace apifuzz

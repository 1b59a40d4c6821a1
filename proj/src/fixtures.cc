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


// Fixture libraries. Site numbers are literal and must match the
// "sites" lists in each fixture's ground_truth.json.

#include <algorithm>
#include <bit>

#include "apifuzz/synthetic_targets.h"

namespace apifuzz {
namespace {

// arraylib: sum(buf, len) reads buf[0..len); peek_tail has a real overflow
// far past any padded length.
uint64_t Sum(CallContext& c) {
  uint64_t buf = c.Ptr(0);
  int32_t len = c.I32(1);
  if (buf == 0) {
    c.Branch(1);
    return 0;
  }
  c.Branch(2);
  uint32_t total = 0;
  for (int32_t i = 0; i < len; ++i) {
    uint8_t b = c.Read8(buf + static_cast<uint64_t>(i), 10);
    c.Branch(b >= 0x80 ? 3 : 4);
    total += b;
  }
  if (c.Cmp(total % 251, 7, 32)) c.Branch(5);
  return total;
}

uint64_t PeekTail(CallContext& c) {
  uint64_t s = c.Ptr(0);
  if (s == 0) {
    c.Branch(1);
    return 0;
  }
  if (!c.Cmp(c.Read8(s, 20), 'T', 8)) {
    c.Branch(2);
    return 0;
  }
  c.Branch(3);
  if (!c.Cmp(c.Read8(s + 1, 21), 'L', 8)) {
    c.Branch(4);
    return 1;
  }
  c.Branch(5);
  return c.Read8(s + 200, 22);
}

// nonnull: peek dereferences without a check; poke checks.
uint64_t Peek(CallContext& c) {
  uint32_t v = c.Read32(c.Ptr(0), 10);
  c.Branch(v > 100 ? 1 : 2);
  if (c.Cmp(v, 0xdead, 32)) c.Branch(3);
  return v;
}

uint64_t Poke(CallContext& c) {
  uint64_t p = c.Ptr(0);
  if (p == 0) {
    c.Branch(1);
    return static_cast<uint64_t>(-1);
  }
  c.Write32(p, c.U32(1), 10);
  c.Branch(2);
  return 0;
}

// filelib: load_config opens its argument as a file.
uint64_t LoadConfig(CallContext& c) {
  uint64_t path = c.Ptr(0);
  if (path == 0) {
    c.Branch(1);
    return static_cast<uint64_t>(-1);
  }
  auto content = c.OpenFile(path, 10);
  if (!content) {
    c.Branch(2);
    return static_cast<uint64_t>(-2);
  }
  c.Branch(3);
  if (content->size() >= 3 && content->compare(0, 3, "cfg") == 0) {
    c.Branch(4);
    if (content->size() > 3 && (*content)[3] == '=') c.Branch(5);
  }
  c.Branch(content->empty() ? 6 : 7);
  return content->size();
}

uint64_t ParseFlags(CallContext& c) {
  uint64_t s = c.Ptr(0);
  if (s == 0) {
    c.Branch(1);
    return 0;
  }
  std::string flags = c.ReadString(s, 20, 64);
  uint64_t bits = 0;
  for (char f : flags) {
    if (f == 'v') {
      c.Branch(2);
      bits |= 1;
    } else if (f == 'q') {
      c.Branch(3);
      bits |= 2;
    }
  }
  return bits;
}

// indexlib: at(buf, idx) reads buf[idx] for non-negative idx.
uint64_t At(CallContext& c) {
  uint64_t buf = c.Ptr(0);
  int32_t idx = c.I32(1);
  if (buf == 0) {
    c.Branch(1);
    return 0;
  }
  if (idx < 0) {
    c.Branch(2);
    return 0;
  }
  uint8_t b = c.Read8(buf + static_cast<uint64_t>(idx), 10);
  c.Branch(b == 0 ? 3 : 4);
  if (c.Cmp(b, '#', 8)) c.Branch(5);
  return b;
}

// fixedlib: checksum16 always reads a 64-byte block.
uint64_t Checksum16(CallContext& c) {
  uint64_t block = c.Ptr(0);
  int32_t seed = c.I32(1);
  if (block == 0) {
    c.Branch(1);
    return 0;
  }
  uint32_t sum = static_cast<uint32_t>(seed);
  for (uint64_t i = 0; i < 64; ++i) sum = sum * 31 + c.Read8(block + i, 10);
  c.Branch(seed > 0 ? 2 : 3);
  c.Branch((sum & 1) != 0 ? 4 : 5);
  return sum & 0xffff;
}

// castlib: blob_tag reads its void* as a string; walk follows it as a
// linked node.
uint64_t BlobTag(CallContext& c) {
  uint64_t data = c.Ptr(0);
  if (data == 0) {
    c.Branch(1);
    return 0;
  }
  std::string tag = c.ReadString(data, 10, 16);
  c.Branch(tag.empty() ? 2 : 3);
  if (tag.size() >= 2 && tag[0] == 'B' && c.Cmp(static_cast<uint8_t>(tag[1]), 'T', 8)) c.Branch(4);
  return tag.size();
}

uint64_t WalkerNew(CallContext& c) {
  uint64_t node = c.Malloc(16, 20);
  c.Write64(node, 0, 21);
  c.Write64(node + 8, 0, 22);
  c.Branch(1);
  return node;
}

uint64_t Walk(CallContext& c) {
  uint64_t node = c.Ptr(0);
  if (node == 0) {
    c.Branch(1);
    return 0;
  }
  uint64_t depth = 0;
  for (; depth < 8; ++depth) {
    uint64_t next = c.Read64(node, 10);
    c.Branch(2);
    if (next == 0) break;
    node = next;
  }
  c.Branch(depth == 0 ? 3 : 4);
  return depth;
}

// resource: reserve(exp) allocates 2^exp bytes and touches every page.
uint64_t Reserve(CallContext& c) {
  int32_t exp = c.I32(0);
  if (exp < 0) {
    c.Branch(1);
    return static_cast<uint64_t>(-1);
  }
  c.Branch(2);
  uint64_t size = exp >= 63 ? ~uint64_t{0} : uint64_t{1} << exp;
  uint64_t p = c.Malloc(size, 10);
  c.Tick(size / 4096 + 1, 11);
  c.Branch(exp > 20 ? 3 : 4);
  c.Free(p, 12);
  return 0;
}

// handle-lib: ctx_open -> ctx_use -> ctx_close.
uint64_t CtxOpen(CallContext& c) {
  int32_t mode = c.I32(0);
  if (mode < 0 || mode > 3) {
    c.Branch(1);
    return 0;
  }
  uint64_t p = c.Malloc(16, 10);
  c.Write32(p, static_cast<uint32_t>(mode), 11);
  c.Write32(p + 4, 0, 12);
  c.Branch(2);
  return p;
}

uint64_t CtxUse(CallContext& c) {
  uint64_t p = c.Ptr(0);
  uint32_t mode = c.Read32(p, 10);
  c.Branch(10 + (mode & 3));
  uint32_t uses = c.Read32(p + 4, 11);
  c.Write32(p + 4, uses + 1, 12);
  if (uses >= 2) c.Branch(20);
  if (c.Cmp(c.U32(1), 0x5a5a, 32)) c.Branch(21);
  return uses;
}

uint64_t CtxClose(CallContext& c) {
  uint64_t p = c.Ptr(0);
  if (p == 0) {
    c.Branch(1);
    return 0;
  }
  c.Branch(2);
  c.Free(p, 10);
  return 0;
}

// pcap-like: three setters gate a double release in activate.
constexpr uint64_t kPcBuf = 0;
constexpr uint64_t kPcSnap = 4;
constexpr uint64_t kPcImm = 8;
constexpr uint64_t kPcActive = 12;
constexpr uint64_t kPcBuffer = 16;

uint64_t PcCreate(CallContext& c) {
  uint64_t dev = c.Ptr(0);
  if (dev == 0) {
    c.Branch(1);
    return 0;
  }
  c.ReadString(dev, 10, 32);
  uint64_t p = c.Malloc(24, 11);
  for (uint64_t off = 0; off < 24; off += 4) c.Write32(p + off, 0, 12);
  c.Branch(2);
  return p;
}

uint64_t PcSet(CallContext& c, uint64_t offset, bool positive) {
  uint64_t p = c.Ptr(0);
  if (p == 0) {
    c.Branch(1);
    return static_cast<uint64_t>(-1);
  }
  int32_t v = c.I32(1);
  if (positive && v <= 0) {
    c.Branch(2);
    return static_cast<uint64_t>(-1);
  }
  c.Write32(p + offset, positive ? static_cast<uint32_t>(v) : (v != 0), 10);
  c.Branch(3);
  return 0;
}

uint64_t PcSetBufferSize(CallContext& c) { return PcSet(c, kPcBuf, true); }
uint64_t PcSetSnaplen(CallContext& c) { return PcSet(c, kPcSnap, true); }
uint64_t PcSetImmediate(CallContext& c) { return PcSet(c, kPcImm, false); }

uint64_t PcLog(CallContext& c) {
  c.Branch(1 + (c.U32(1) & 3));
  return 0;
}

uint64_t PcActivate(CallContext& c) {
  uint64_t p = c.Ptr(0);
  if (p == 0) {
    c.Branch(1);
    return static_cast<uint64_t>(-1);
  }
  if (c.Read32(p + kPcActive, 10) != 0) {
    c.Branch(2);
    return static_cast<uint64_t>(-2);
  }
  uint32_t buf = c.Read32(p + kPcBuf, 11);
  uint32_t snap = c.Read32(p + kPcSnap, 12);
  uint32_t imm = c.Read32(p + kPcImm, 13);
  c.Branch(buf != 0 ? 3 : 4);
  c.Branch(snap != 0 ? 5 : 6);
  c.Branch(imm != 0 ? 7 : 8);
  uint64_t buffer = c.Malloc(buf != 0 ? buf % 4096 + 1 : 64, 14);
  c.Write64(p + kPcBuffer, buffer, 15);
  if (buf != 0 && snap != 0 && imm != 0) {
    c.Branch(9);
    c.Free(buffer, 16);
    c.Free(buffer, 17);
  }
  c.Write32(p + kPcActive, 1, 18);
  return 0;
}

// sqlite-like: db_open fills an out-parameter; db_overload has a
// format-directive bug.
uint64_t DbOpen(CallContext& c) {
  uint64_t name = c.Ptr(0);
  uint64_t out = c.Ptr(1);
  if (out == 0 || name == 0) {
    c.Branch(1);
    return 1;
  }
  auto content = c.OpenFile(name, 10);
  c.Branch(content ? 2 : 3);
  uint64_t db = c.Malloc(16, 11);
  c.Write64(db, content && !content->empty() ? static_cast<uint8_t>((*content)[0]) : 0, 12);
  c.Write64(db + 8, 0, 13);
  c.Write64(out, db, 14);
  return 0;
}

uint64_t DbExec(CallContext& c) {
  uint64_t db = c.Ptr(0);
  uint64_t flags = c.Read64(db, 10);
  c.Branch(flags != 0 ? 1 : 2);
  uint64_t sql = c.Ptr(1);
  if (sql == 0) {
    c.Branch(3);
    return 1;
  }
  std::string text = c.ReadString(sql, 11, 64);
  if (text.size() >= 6 && text.compare(0, 6, "SELECT") == 0) c.Branch(4);
  c.Write64(db + 8, c.Read64(db + 8, 12) + 1, 13);
  return 0;
}

uint64_t DbOverload(CallContext& c) {
  uint64_t db = c.Ptr(0);
  c.Read64(db, 10);
  uint64_t name = c.Ptr(1);
  if (name == 0) {
    c.Branch(1);
    return 1;
  }
  std::string text = c.ReadString(name, 11, 64);
  c.Branch(2);
  for (size_t i = 0; i + 1 < text.size(); ++i) {
    if (!c.Cmp(static_cast<uint8_t>(text[i]), '%', 8)) continue;
    c.Branch(3);
    if (c.Cmp(static_cast<uint8_t>(text[i + 1]), 'n', 8)) {
      c.Branch(4);
      // The directive stores through a pointer that was never passed.
      uint64_t target = 0x100000000000ull + (static_cast<uint64_t>(c.U32(2)) << 12);
      c.Write32(target, static_cast<uint32_t>(i), 12);
    }
  }
  return 0;
}

uint64_t DbClose(CallContext& c) {
  uint64_t db = c.Ptr(0);
  if (db == 0) {
    c.Branch(1);
    return 0;
  }
  c.Branch(2);
  c.Free(db, 10);
  return 0;
}

// cjson: record layout per the manifest (next 0, prev 8, child 16,
// type_ 24, valuestring 32, valueint 40, valuedouble 48, string 56).
constexpr uint64_t kJsonChild = 16;
constexpr uint64_t kJsonType = 24;
constexpr uint64_t kJsonInt = 40;
constexpr uint64_t kJsonString = 56;
constexpr uint64_t kJsonSize = 64;

uint64_t NewItem(CallContext& c, uint32_t type, uint32_t site) {
  uint64_t item = c.Malloc(kJsonSize, site);
  for (uint64_t off = 0; off < kJsonSize; off += 8) c.Write64(item + off, 0, site);
  c.Write32(item + kJsonType, type, site);
  return item;
}

uint64_t JsonParseWithOpts(CallContext& c) {
  uint64_t value = c.Ptr(0);
  uint64_t end_out = c.Ptr(1);
  if (value == 0) {
    c.Branch(1);
    return 0;
  }
  if (!c.Cmp(c.Read8(value, 10), '{', 8)) {
    c.Branch(2);
    return 0;
  }
  c.Branch(3);
  uint64_t len = 1;
  int depth = 1;
  while (depth > 0 && len < 256) {
    uint8_t b = c.Read8(value + len, 11);
    if (b == 0) break;
    if (b == '{') {
      c.Branch(4);
      ++depth;
    } else if (b == '}') {
      c.Branch(5);
      --depth;
    }
    ++len;
  }
  if (depth != 0 && c.I32(2) != 0) {
    c.Branch(6);
    return 0;
  }
  uint64_t obj = NewItem(c, 6, 12);
  c.Write32(obj + kJsonInt, static_cast<uint32_t>(len), 13);
  if (end_out != 0) {
    c.Branch(7);
    c.Write64(end_out, value + len, 14);
  }
  return obj;
}

uint64_t JsonAddFalse(CallContext& c) {
  uint64_t obj = c.Ptr(0);
  uint64_t name = c.Ptr(1);
  if (obj == 0 || name == 0) {
    c.Branch(1);
    return 0;
  }
  c.Branch(2);
  uint64_t item = NewItem(c, 1, 10);
  c.Write64(item + kJsonString, name, 11);
  c.Write64(item, c.Read64(obj + kJsonChild, 12), 13);
  c.Write64(obj + kJsonChild, item, 14);
  return item;
}

uint64_t JsonPrintBuffered(CallContext& c) {
  uint64_t item = c.Ptr(0);
  int32_t prebuffer = c.I32(1);
  if (item == 0 || prebuffer < 0 || prebuffer > (1 << 20)) {
    c.Branch(1);
    return 0;
  }
  uint32_t type = c.Read32(item + kJsonType, 10);
  c.Branch(type == 6 ? 2 : 3);
  uint64_t n = 0;
  for (uint64_t child = c.Read64(item + kJsonChild, 11); child != 0 && n < 16; ++n) {
    c.Branch(4);
    child = c.Read64(child, 12);
  }
  c.Branch(c.I32(2) != 0 ? 5 : 6);
  uint64_t out = c.Malloc(static_cast<uint64_t>(prebuffer) + 16 * n + 1, 13);
  c.Write8(out, 0, 14);
  return out;
}

uint64_t JsonGetArraySize(CallContext& c) {
  uint64_t item = c.Ptr(0);
  if (item == 0) {
    c.Branch(1);
    return 0;
  }
  uint64_t n = 0;
  for (uint64_t child = c.Read64(item + kJsonChild, 10); child != 0 && n < 16; ++n) {
    c.Branch(2);
    child = c.Read64(child, 11);
  }
  return n;
}

uint64_t JsonDelete(CallContext& c) {
  uint64_t item = c.Ptr(0);
  if (item == 0) {
    c.Branch(1);
    return 0;
  }
  c.Branch(2);
  c.Write32(item + kJsonType, 0xffffffffu, 10);
  return 0;
}

const SyntheticLibrary kArrayLib{"arraylib", {{"sum", Sum}, {"peek_tail", PeekTail}}};
const SyntheticLibrary kNonNull{"nonnull", {{"peek", Peek}, {"poke", Poke}}};
const SyntheticLibrary kFileLib{"filelib", {{"load_config", LoadConfig}, {"parse_flags", ParseFlags}}};
const SyntheticLibrary kIndexLib{"indexlib", {{"at", At}}};
const SyntheticLibrary kFixedLib{"fixedlib", {{"checksum16", Checksum16}}};
const SyntheticLibrary kCastLib{"castlib",
                                {{"blob_tag", BlobTag}, {"walker_new", WalkerNew}, {"walk", Walk}}};
const SyntheticLibrary kResource{"resource", {{"reserve", Reserve}}};
const SyntheticLibrary kHandleLib{
    "handle-lib", {{"ctx_open", CtxOpen}, {"ctx_use", CtxUse}, {"ctx_close", CtxClose}}};
const SyntheticLibrary kPcapLike{"pcap-like",
                                 {{"pc_create", PcCreate},
                                  {"pc_set_buffer_size", PcSetBufferSize},
                                  {"pc_set_snaplen", PcSetSnaplen},
                                  {"pc_set_immediate", PcSetImmediate},
                                  {"pc_log", PcLog},
                                  {"pc_activate", PcActivate}}};
const SyntheticLibrary kSqliteLike{"sqlite-like",
                                   {{"db_open", DbOpen},
                                    {"db_exec", DbExec},
                                    {"db_overload", DbOverload},
                                    {"db_close", DbClose}}};
const SyntheticLibrary kCjson{"cjson",
                              {{"cJSON_ParseWithOpts", JsonParseWithOpts},
                               {"cJSON_AddFalseToObject", JsonAddFalse},
                               {"cJSON_PrintBuffered", JsonPrintBuffered},
                               {"cJSON_GetArraySize", JsonGetArraySize},
                               {"cJSON_Delete", JsonDelete}}};

}  // namespace

const std::vector<CatalogEntry>& FixtureCatalog() {
  static const std::vector<CatalogEntry> kCatalog = {
      {"arraylib", &kArrayLib, true},     {"nonnull", &kNonNull, true},
      {"filelib", &kFileLib, true},       {"indexlib", &kIndexLib, true},
      {"fixedlib", &kFixedLib, true},     {"castlib", &kCastLib, true},
      {"resource", &kResource, false},    {"handle-lib", &kHandleLib, false},
      {"pcap-like", &kPcapLike, false},   {"sqlite-like", &kSqliteLike, false},
      {"cjson", &kCjson, false},
  };
  return kCatalog;
}

const SyntheticLibrary* FindSyntheticLibrary(std::string_view name) {
  for (const auto& e : FixtureCatalog()) {
    if (e.name == name) return e.library;
  }
  return nullptr;
}

}  // namespace apifuzz

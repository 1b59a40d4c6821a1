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


#include "apifuzz/memory.h"

#include <sys/mman.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>

namespace apifuzz {

SimMemory::SimMemory(uint64_t guard_bytes, uint64_t limit_bytes, uint64_t near_null)
    : guard_bytes_(guard_bytes), limit_(limit_bytes), near_null_(near_null) {}

std::optional<GuardedBlock> SimMemory::Carve(uint64_t size, RegionKind kind) {
  uint64_t span = std::max<uint64_t>(1, (size + guard_bytes_ - 1) / guard_bytes_) * guard_bytes_;
  // Keep the simulated space below the stub address.
  if (size > limit_ || cursor_ + span + 2 * guard_bytes_ >= kStubAddress) return std::nullopt;
  GuardedBlock b;
  b.guard_base = cursor_ + span;
  b.guard_size = guard_bytes_;
  b.base = b.guard_base - size;
  b.size = size;
  if (size > 0) regions_[b.base] = Region{size, kind, false};
  regions_[b.guard_base] = Region{guard_bytes_, RegionKind::kGuard, false};
  // One spare guard's worth of unmapped gap between blocks.
  cursor_ = b.guard_base + 2 * guard_bytes_;
  return b;
}

std::optional<GuardedBlock> SimMemory::AllocGuarded(uint64_t size) {
  if (data_in_use_ + size > limit_) return std::nullopt;
  auto b = Carve(size, RegionKind::kData);
  if (b) data_in_use_ += size;
  return b;
}

std::optional<GuardedBlock> SimMemory::ProtectedChunk() {
  GuardedBlock b;
  b.base = b.guard_base = cursor_;
  b.size = 0;
  b.guard_size = guard_bytes_;
  regions_[cursor_] = Region{guard_bytes_, RegionKind::kGuard, false};
  cursor_ += 2 * guard_bytes_;
  return b;
}

const SimMemory::Region* SimMemory::Find(uint64_t address, uint64_t* base) const {
  auto it = regions_.upper_bound(address);
  if (it == regions_.begin()) return nullptr;
  --it;
  if (address - it->first >= it->second.size) return nullptr;
  *base = it->first;
  return &it->second;
}

std::optional<uint64_t> SimMemory::FirstBad(uint64_t address, uint64_t n) const {
  uint64_t a = address;
  uint64_t end = address + n;
  if (end < address) return address;
  while (a < end) {
    uint64_t base = 0;
    const Region* r = Find(a, &base);
    if (r == nullptr || r->kind == RegionKind::kGuard || r->freed) return a;
    a = base + r->size;
  }
  return std::nullopt;
}

void SimMemory::CopyOut(uint64_t address, void* out, uint64_t n) const {
  auto* dst = static_cast<uint8_t*>(out);
  while (n > 0) {
    uint64_t page = address / kPage;
    uint64_t off = address % kPage;
    uint64_t chunk = std::min(n, kPage - off);
    auto it = pages_.find(page);
    if (it == pages_.end()) {
      std::memset(dst, 0, chunk);
    } else {
      std::memcpy(dst, it->second->data() + off, chunk);
    }
    dst += chunk;
    address += chunk;
    n -= chunk;
  }
}

void SimMemory::CopyIn(uint64_t address, const void* in, uint64_t n) {
  const auto* src = static_cast<const uint8_t*>(in);
  while (n > 0) {
    uint64_t page = address / kPage;
    uint64_t off = address % kPage;
    uint64_t chunk = std::min(n, kPage - off);
    auto& p = pages_[page];
    if (!p) p = std::make_unique<Page>(Page{});
    std::memcpy(p->data() + off, src, chunk);
    src += chunk;
    address += chunk;
    n -= chunk;
  }
}

bool SimMemory::SafeRead(uint64_t address, void* out, uint64_t n) const {
  if (FirstBad(address, n)) return false;
  CopyOut(address, out, n);
  return true;
}

bool SimMemory::SafeWrite(uint64_t address, const void* in, uint64_t n) {
  if (FirstBad(address, n)) return false;
  CopyIn(address, in, n);
  return true;
}

bool SimMemory::InFreedChunk(uint64_t address) const {
  uint64_t base = 0;
  const Region* r = Find(address, &base);
  return r != nullptr && r->freed;
}

FaultKind SimMemory::Classify(uint64_t address) const {
  if (address < near_null_) return FaultKind::kNullDeref;
  uint64_t base = 0;
  const Region* r = Find(address, &base);
  if (r != nullptr && r->kind == RegionKind::kGuard) return FaultKind::kCanaryHit;
  return FaultKind::kInvalidAccess;
}

void SimMemory::Read(uint64_t address, void* out, uint64_t n, uint32_t site) const {
  if (auto bad = FirstBad(address, n)) throw TargetTrap{Classify(*bad), *bad, site};
  CopyOut(address, out, n);
}

void SimMemory::Write(uint64_t address, const void* in, uint64_t n, uint32_t site) {
  if (auto bad = FirstBad(address, n)) throw TargetTrap{Classify(*bad), *bad, site};
  CopyIn(address, in, n);
}

uint64_t SimMemory::Malloc(uint64_t n, uint32_t site) {
  if (n > limit_ || in_use_ + n > limit_) throw TargetTrap{FaultKind::kOom, 0, site};
  auto b = Carve(n, RegionKind::kHeap);
  if (!b) throw TargetTrap{FaultKind::kOom, 0, site};
  in_use_ += n;
  if (n == 0) {
    // Zero-sized chunks still need a distinct, freeable address.
    regions_[b->base - 1] = Region{1, RegionKind::kHeap, false};
    return b->base - 1;
  }
  return b->base;
}

void SimMemory::Free(uint64_t address, uint32_t site) {
  if (address == 0) return;
  auto it = regions_.find(address);
  if (it == regions_.end() || it->second.kind != RegionKind::kHeap || it->second.freed) {
    throw TargetTrap{FaultKind::kAbort, address, site};
  }
  it->second.freed = true;
  in_use_ -= std::min(in_use_, it->second.size);
}

MappedMemory::MappedMemory(uint64_t guard_bytes, uint64_t limit_bytes)
    : guard_bytes_(guard_bytes), limit_(limit_bytes) {
  auto page = static_cast<uint64_t>(sysconf(_SC_PAGESIZE));
  guard_bytes_ = std::max<uint64_t>(page, (guard_bytes_ + page - 1) / page * page);
}

MappedMemory::~MappedMemory() {
  for (auto& [p, n] : mappings_) munmap(p, n);
}

std::optional<GuardedBlock> MappedMemory::AllocGuarded(uint64_t size) {
  if (in_use_ + size > limit_) return std::nullopt;
  uint64_t span = std::max<uint64_t>(1, (size + guard_bytes_ - 1) / guard_bytes_) * guard_bytes_;
  size_t total = span + guard_bytes_;
  void* p = mmap(nullptr, total, PROT_READ | PROT_WRITE, MAP_PRIVATE | MAP_ANONYMOUS, -1, 0);
  if (p == MAP_FAILED) return std::nullopt;
  auto* bytes = static_cast<uint8_t*>(p);
  if (mprotect(bytes + span, guard_bytes_, PROT_NONE) != 0) {
    munmap(p, total);
    return std::nullopt;
  }
  mappings_.emplace_back(p, total);
  GuardedBlock b;
  b.guard_base = reinterpret_cast<uint64_t>(bytes + span);
  b.guard_size = guard_bytes_;
  b.base = b.guard_base - size;
  b.size = size;
  if (size > 0) blocks_[b.base] = size;
  in_use_ += size;
  return b;
}

std::optional<GuardedBlock> MappedMemory::ProtectedChunk() {
  void* p = mmap(nullptr, guard_bytes_, PROT_NONE, MAP_PRIVATE | MAP_ANONYMOUS, -1, 0);
  if (p == MAP_FAILED) return std::nullopt;
  mappings_.emplace_back(p, guard_bytes_);
  GuardedBlock b;
  b.base = b.guard_base = reinterpret_cast<uint64_t>(p);
  b.guard_size = guard_bytes_;
  return b;
}

bool MappedMemory::Contains(uint64_t address, uint64_t n) const {
  auto inside = [&](const auto& map, auto size_of, auto ok) {
    auto it = map.upper_bound(address);
    if (it == map.begin()) return false;
    --it;
    return ok(it->second) && address - it->first <= size_of(it->second) &&
           n <= size_of(it->second) - (address - it->first);
  };
  if (inside(blocks_, [](uint64_t s) { return s; }, [](uint64_t) { return true; })) return true;
  return inside(chunks_, [](const Chunk& c) { return c.size; },
                [](const Chunk& c) { return !c.freed; });
}

bool MappedMemory::SafeRead(uint64_t address, void* out, uint64_t n) const {
  if (!Contains(address, n)) return false;
  std::memcpy(out, reinterpret_cast<const void*>(address), n);
  return true;
}

bool MappedMemory::SafeWrite(uint64_t address, const void* in, uint64_t n) {
  if (!Contains(address, n)) return false;
  std::memcpy(reinterpret_cast<void*>(address), in, n);
  return true;
}

bool MappedMemory::InFreedChunk(uint64_t address) const {
  auto it = chunks_.upper_bound(address);
  if (it == chunks_.begin()) return false;
  --it;
  return it->second.freed && address - it->first < std::max<uint64_t>(1, it->second.size);
}

uint64_t MappedMemory::StubAddress() const {
  return reinterpret_cast<uint64_t>(&apifuzz_zero_stub);
}

void MappedMemory::OnAlloc(uint64_t address, uint64_t size) {
  if (address != 0) chunks_[address] = Chunk{size, false};
}

void MappedMemory::OnFree(uint64_t address) {
  auto it = chunks_.find(address);
  if (it != chunks_.end()) it->second.freed = true;
}

}  // namespace apifuzz

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


// Address spaces the executor materializes values into.
//
// SimMemory is a simulated 64-bit address space used by in-process targets;
// every access is bounds-checked and faults surface as TargetTrap
// exceptions. MappedMemory hands out real pages with PROT_NONE guards and
// is used by the foreign-function backend inside a child process.

#ifndef APIFUZZ_MEMORY_H_
#define APIFUZZ_MEMORY_H_

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "apifuzz/feedback.h"

namespace apifuzz {

inline constexpr uint64_t kDefaultGuardBytes = 4096;
inline constexpr uint64_t kNearNullThreshold = 4096;

// Raised by simulated targets. `site` is local to the running function.
struct TargetTrap {
  FaultKind kind = FaultKind::kInvalidAccess;
  uint64_t address = 0;
  uint32_t site = 0;
};

struct GuardedBlock {
  uint64_t base = 0;
  uint64_t size = 0;
  uint64_t guard_base = 0;
  uint64_t guard_size = 0;
};

class Memory {
 public:
  virtual ~Memory() = default;

  // A block whose last byte abuts a guard region. Nullopt once the arena
  // is exhausted.
  virtual std::optional<GuardedBlock> AllocGuarded(uint64_t size) = 0;
  // A chunk on which every access faults.
  virtual std::optional<GuardedBlock> ProtectedChunk() = 0;

  // Executor-side accessors; they refuse instead of faulting.
  virtual bool SafeRead(uint64_t address, void* out, uint64_t n) const = 0;
  virtual bool SafeWrite(uint64_t address, const void* in, uint64_t n) = 0;

  // Whether `address` lies in a chunk the target already freed.
  virtual bool InFreedChunk(uint64_t address) const = 0;

  // Value handed to targets for a function-pointer stub.
  virtual uint64_t StubAddress() const = 0;
};

class SimMemory : public Memory {
 public:
  SimMemory(uint64_t guard_bytes, uint64_t limit_bytes, uint64_t near_null);

  std::optional<GuardedBlock> AllocGuarded(uint64_t size) override;
  std::optional<GuardedBlock> ProtectedChunk() override;
  bool SafeRead(uint64_t address, void* out, uint64_t n) const override;
  bool SafeWrite(uint64_t address, const void* in, uint64_t n) override;
  bool InFreedChunk(uint64_t address) const override;
  uint64_t StubAddress() const override { return kStubAddress; }

  // Target-side accessors. Throw TargetTrap on any invalid byte.
  void Read(uint64_t address, void* out, uint64_t n, uint32_t site) const;
  void Write(uint64_t address, const void* in, uint64_t n, uint32_t site);
  // Heap chunks are guarded like arena blocks. Exceeding the limit raises
  // kOom; bad or repeated frees raise kAbort.
  uint64_t Malloc(uint64_t n, uint32_t site);
  void Free(uint64_t address, uint32_t site);

  FaultKind Classify(uint64_t address) const;
  // Live target heap bytes. Executor blocks have a separate budget of the
  // same size.
  uint64_t in_use() const { return in_use_; }

  static constexpr uint64_t kStubAddress = 0x7f0000000000ull;

 private:
  enum class RegionKind { kData, kHeap, kGuard };
  struct Region {
    uint64_t size = 0;
    RegionKind kind = RegionKind::kData;
    bool freed = false;
  };
  static constexpr uint64_t kPage = 4096;
  using Page = std::array<uint8_t, kPage>;

  // Region containing `address`, if any.
  const Region* Find(uint64_t address, uint64_t* base) const;
  // First invalid address in [address, address + n), or nullopt.
  std::optional<uint64_t> FirstBad(uint64_t address, uint64_t n) const;
  void CopyOut(uint64_t address, void* out, uint64_t n) const;
  void CopyIn(uint64_t address, const void* in, uint64_t n);
  std::optional<GuardedBlock> Carve(uint64_t size, RegionKind kind);

  uint64_t guard_bytes_;
  uint64_t limit_;
  uint64_t near_null_;
  uint64_t cursor_ = 0x10000;
  uint64_t in_use_ = 0;
  uint64_t data_in_use_ = 0;
  std::map<uint64_t, Region> regions_;
  std::unordered_map<uint64_t, std::unique_ptr<Page>> pages_;
};

// Real pages for the foreign-function backend. Target heap chunks are
// learned from hop_alloc/hop_free events.
class MappedMemory : public Memory, public HookSink {
 public:
  MappedMemory(uint64_t guard_bytes, uint64_t limit_bytes);
  ~MappedMemory() override;
  MappedMemory(const MappedMemory&) = delete;
  MappedMemory& operator=(const MappedMemory&) = delete;

  std::optional<GuardedBlock> AllocGuarded(uint64_t size) override;
  std::optional<GuardedBlock> ProtectedChunk() override;
  bool SafeRead(uint64_t address, void* out, uint64_t n) const override;
  bool SafeWrite(uint64_t address, const void* in, uint64_t n) override;
  bool InFreedChunk(uint64_t address) const override;
  uint64_t StubAddress() const override;

  void OnBranch(uint32_t) override {}
  void OnCmp(uint64_t, uint64_t, uint32_t) override {}
  void OnAlloc(uint64_t address, uint64_t size) override;
  void OnFree(uint64_t address) override;
  void OnFileOpen(std::string_view) override {}

 private:
  struct Chunk {
    uint64_t size = 0;
    bool freed = false;
  };
  bool Contains(uint64_t address, uint64_t n) const;

  uint64_t guard_bytes_;
  uint64_t limit_;
  uint64_t in_use_ = 0;
  std::vector<std::pair<void*, size_t>> mappings_;
  std::map<uint64_t, uint64_t> blocks_;  // executor blocks: base -> size
  std::map<uint64_t, Chunk> chunks_;     // target heap chunks
};

}  // namespace apifuzz

#endif  // APIFUZZ_MEMORY_H_

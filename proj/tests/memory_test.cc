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


#include <signal.h>

#include <cstring>
#include <vector>

#include "apifuzz/feedback.h"
#include "apifuzz/hooks.h"
#include "apifuzz/memory.h"
#include "gtest/gtest.h"

namespace apifuzz {
namespace {

SimMemory MakeSim() { return SimMemory(kDefaultGuardBytes, 1 << 20, kNearNullThreshold); }

FaultKind TrapKind(const SimMemory& mem, uint64_t addr, uint64_t n) {
  std::vector<uint8_t> buf(n);
  try {
    mem.Read(addr, buf.data(), n, 0);
  } catch (const TargetTrap& t) {
    return t.kind;
  }
  ADD_FAILURE() << "no trap at " << addr;
  return FaultKind::kAbort;
}

TEST(SimMemoryTest, ReadPastEndHitsCanary) {
  SimMemory mem = MakeSim();
  auto b = mem.AllocGuarded(7);
  ASSERT_TRUE(b.has_value());
  EXPECT_EQ(b->base + 7, b->guard_base);
  uint8_t byte = 0;
  for (uint64_t off = 0; off < 7; ++off) mem.Read(b->base + off, &byte, 1, 0);
  try {
    mem.Read(b->base + 7, &byte, 1, 3);
    FAIL() << "read past end did not trap";
  } catch (const TargetTrap& t) {
    EXPECT_EQ(t.kind, FaultKind::kCanaryHit);
    EXPECT_GE(t.address, b->guard_base);
    EXPECT_LT(t.address, b->guard_base + b->guard_size);
    EXPECT_EQ(t.site, 3u);
  }
}

TEST(SimMemoryTest, WideReadStraddlingTheEndFaultsAtTheGuard) {
  SimMemory mem = MakeSim();
  auto b = mem.AllocGuarded(6);
  uint32_t v = 0;
  try {
    mem.Read(b->base + 4, &v, 4, 0);
    FAIL();
  } catch (const TargetTrap& t) {
    EXPECT_EQ(t.address, b->guard_base);
  }
}

// Every block of every size in a small arena is disjoint from every other
// block and guard, fully readable, and trapped one byte past its end.
TEST(SimMemoryTest, SmallArenaBlocksAreDisjointAndGuarded) {
  SimMemory mem = MakeSim();
  std::vector<GuardedBlock> blocks;
  for (uint64_t size = 0; size <= 40; ++size) {
    auto b = mem.AllocGuarded(size * 37 % 9000);
    ASSERT_TRUE(b.has_value());
    blocks.push_back(*b);
  }
  auto overlap = [](uint64_t a, uint64_t an, uint64_t b, uint64_t bn) {
    return an > 0 && bn > 0 && a < b + bn && b < a + an;
  };
  for (size_t i = 0; i < blocks.size(); ++i) {
    const auto& x = blocks[i];
    EXPECT_EQ(x.base + x.size, x.guard_base);
    EXPECT_FALSE(overlap(x.base, x.size, x.guard_base, x.guard_size));
    for (size_t j = 0; j < blocks.size(); ++j) {
      if (i == j) continue;
      const auto& y = blocks[j];
      EXPECT_FALSE(overlap(x.base, x.size, y.base, y.size)) << i << " vs " << j;
      EXPECT_FALSE(overlap(x.base, x.size, y.guard_base, y.guard_size)) << i << " vs " << j;
    }
    std::vector<uint8_t> buf(x.size);
    if (x.size > 0) {
      std::memset(buf.data(), static_cast<int>(i), x.size);
      ASSERT_TRUE(mem.SafeWrite(x.base, buf.data(), x.size));
    }
    EXPECT_EQ(TrapKind(mem, x.base + x.size, 1), FaultKind::kCanaryHit);
  }
  for (size_t i = 0; i < blocks.size(); ++i) {
    std::vector<uint8_t> buf(blocks[i].size);
    if (buf.empty()) continue;
    ASSERT_TRUE(mem.SafeRead(blocks[i].base, buf.data(), buf.size()));
    for (uint8_t b : buf) ASSERT_EQ(b, static_cast<uint8_t>(i));
  }
}

TEST(SimMemoryTest, ZeroSizedBlockSitsOnItsGuard) {
  SimMemory mem = MakeSim();
  auto b = mem.AllocGuarded(0);
  EXPECT_EQ(b->base, b->guard_base);
  EXPECT_EQ(TrapKind(mem, b->base, 1), FaultKind::kCanaryHit);
}

TEST(SimMemoryTest, ClassifiesAddresses) {
  SimMemory mem = MakeSim();
  auto b = mem.AllocGuarded(16);
  EXPECT_EQ(mem.Classify(0), FaultKind::kNullDeref);
  EXPECT_EQ(mem.Classify(kNearNullThreshold - 1), FaultKind::kNullDeref);
  EXPECT_EQ(mem.Classify(b->guard_base), FaultKind::kCanaryHit);
  EXPECT_EQ(mem.Classify(b->guard_base + b->guard_size - 1), FaultKind::kCanaryHit);
  EXPECT_EQ(mem.Classify(0x123456789000ull), FaultKind::kInvalidAccess);
  EXPECT_EQ(TrapKind(mem, 8, 1), FaultKind::kNullDeref);
}

TEST(SimMemoryTest, HeapFreeRules) {
  SimMemory mem = MakeSim();
  uint64_t p = mem.Malloc(32, 0);
  uint64_t v = 5;
  mem.Write(p, &v, 8, 0);
  EXPECT_FALSE(mem.InFreedChunk(p));
  mem.Free(p, 0);
  EXPECT_TRUE(mem.InFreedChunk(p + 31));
  EXPECT_EQ(TrapKind(mem, p, 8), FaultKind::kInvalidAccess);
  try {
    mem.Free(p, 9);
    FAIL() << "double free";
  } catch (const TargetTrap& t) {
    EXPECT_EQ(t.kind, FaultKind::kAbort);
    EXPECT_EQ(t.site, 9u);
  }
  auto data = mem.AllocGuarded(8);
  EXPECT_THROW(mem.Free(data->base, 0), TargetTrap);
  mem.Free(0, 0);
}

TEST(SimMemoryTest, HeapLimitRaisesOom) {
  SimMemory mem(kDefaultGuardBytes, 1000, kNearNullThreshold);
  uint64_t p = mem.Malloc(600, 0);
  try {
    mem.Malloc(600, 4);
    FAIL();
  } catch (const TargetTrap& t) {
    EXPECT_EQ(t.kind, FaultKind::kOom);
  }
  mem.Free(p, 0);
  EXPECT_NO_THROW(mem.Malloc(600, 0));
  EXPECT_FALSE(mem.AllocGuarded(2000).has_value());
}

TEST(SimMemoryTest, ProtectedChunkTrapsEveryByte) {
  SimMemory mem = MakeSim();
  auto c = mem.ProtectedChunk();
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(TrapKind(mem, c->base, 1), FaultKind::kCanaryHit);
  EXPECT_EQ(TrapKind(mem, c->base + c->guard_size - 8, 8), FaultKind::kCanaryHit);
}

TEST(MappedMemoryTest, GuardPageIsProtected) {
  MappedMemory mem(kDefaultGuardBytes, 1 << 20);
  auto b = mem.AllocGuarded(7);
  ASSERT_TRUE(b.has_value());
  EXPECT_EQ(b->base + 7, b->guard_base);
  char msg[] = "abcdefg";
  EXPECT_TRUE(mem.SafeWrite(b->base, msg, 7));
  EXPECT_FALSE(mem.SafeWrite(b->base, msg, 8));
  char back[7];
  EXPECT_TRUE(mem.SafeRead(b->base, back, 7));
  EXPECT_EQ(std::memcmp(back, msg, 7), 0);
  auto* past = reinterpret_cast<volatile char*>(b->base + 7);
  EXPECT_EXIT((void)*past, ::testing::KilledBySignal(SIGSEGV), "");
}

TEST(MappedMemoryTest, TracksTargetChunksFromHooks) {
  MappedMemory mem(kDefaultGuardBytes, 1 << 20);
  std::vector<uint8_t> chunk(24, 1);
  auto addr = reinterpret_cast<uint64_t>(chunk.data());
  uint8_t b = 0;
  EXPECT_FALSE(mem.SafeRead(addr, &b, 1));
  mem.OnAlloc(addr, chunk.size());
  EXPECT_TRUE(mem.SafeRead(addr + 23, &b, 1));
  EXPECT_FALSE(mem.SafeRead(addr + 20, &b, 8));
  mem.OnFree(addr);
  EXPECT_TRUE(mem.InFreedChunk(addr + 3));
  EXPECT_FALSE(mem.SafeRead(addr, &b, 1));
}

TEST(HooksTest, ContextHashIsFnv1a32) {
  EXPECT_EQ(ContextHash(""), 0x811c9dc5u);
  EXPECT_EQ(ContextHash("a"), 0xe40c292cu);
  EXPECT_EQ(ContextHash("foobar"), 0xbf9cf968u);
}

class RecordingSink : public HookSink {
 public:
  void OnBranch(uint32_t site) override { branches.push_back(site); }
  void OnCmp(uint64_t, uint64_t, uint32_t) override { ++cmps; }
  void OnAlloc(uint64_t, uint64_t n) override { allocs.push_back(n); }
  void OnFree(uint64_t) override { ++frees; }
  void OnFileOpen(std::string_view name) override { files.emplace_back(name); }
  std::vector<uint32_t> branches;
  std::vector<uint64_t> allocs;
  std::vector<std::string> files;
  int cmps = 0;
  int frees = 0;
};

TEST(HooksTest, CEntryPointsRouteToTheThreadSink) {
  hop_branch(1);  // no sink: dropped
  RecordingSink sink;
  {
    ScopedHookSink scope(&sink);
    hop_branch(7);
    hop_cmp(1, 2, 32);
    int x = 0;
    hop_alloc(&x, 4);
    hop_free(&x);
    hop_fopen("cfg.txt");
    hop_fopen(nullptr);
  }
  hop_branch(8);
  EXPECT_EQ(sink.branches, std::vector<uint32_t>{7});
  EXPECT_EQ(sink.cmps, 1);
  EXPECT_EQ(sink.allocs, std::vector<uint64_t>{4});
  EXPECT_EQ(sink.frees, 1);
  EXPECT_EQ(sink.files, std::vector<std::string>{"cfg.txt"});
  EXPECT_EQ(ThreadHookSink(), nullptr);
  EXPECT_EQ(apifuzz_zero_stub(), 0u);
}

TEST(FeedbackCollectorTest, BranchesCountOnlyInsideTrackedCalls) {
  auto area = std::make_unique<FeedbackArea>();
  FeedbackCollector fc(area.get());
  fc.Reset(true);
  fc.OnBranch(5);
  fc.BeginCall(0, 0, "f", false);
  fc.OnBranch(5);
  fc.EndCall(0);
  fc.BeginCall(1, 0, "f", true);
  fc.OnBranch(5);
  fc.OnBranch(5);
  fc.EndCall(0);
  fc.OnFileOpen("outside");
  auto r = Harvest(*area, &fc.touched(), {"f"});
  ASSERT_EQ(r.coverage.size(), 1u);
  EXPECT_EQ(r.coverage[0].key, CoverageKey(5, ContextHash("f")));
  EXPECT_EQ(r.coverage[0].hits, 2u);
  EXPECT_EQ(r.coverage[0].first_stmt, 1u);
  EXPECT_TRUE(r.resource_log.empty());
  EXPECT_EQ(r.calls.size(), 2u);
}

TEST(FeedbackCollectorTest, SameSiteUnderTwoFunctionsGivesTwoKeys) {
  auto area = std::make_unique<FeedbackArea>();
  FeedbackCollector fc(area.get());
  fc.Reset(true);
  fc.BeginCall(0, 0, "sum", true);
  fc.OnBranch(1);
  fc.EndCall(0);
  fc.BeginCall(1, 1, "peek_tail", true);
  fc.OnBranch(1);
  fc.EndCall(0);
  auto r = Harvest(*area, &fc.touched(), {"sum", "peek_tail"});
  EXPECT_EQ(r.coverage.size(), 2u);
  // A full scan agrees with the touched list.
  EXPECT_EQ(Harvest(*area, nullptr, {"sum", "peek_tail"}).coverage, r.coverage);
}

TEST(FeedbackCollectorTest, HitCountsSaturate) {
  auto area = std::make_unique<FeedbackArea>();
  FeedbackCollector fc(area.get());
  fc.Reset(true);
  fc.BeginCall(0, 0, "f", true);
  fc.OnBranch(3);
  area->coverage[CoverageKey(3, ContextHash("f"))] = UINT32_MAX - 1;
  fc.OnBranch(3);
  fc.OnBranch(3);
  EXPECT_EQ(area->coverage[CoverageKey(3, ContextHash("f"))], UINT32_MAX);
}

TEST(FeedbackCollectorTest, EventLogOverflowIsCounted) {
  auto area = std::make_unique<FeedbackArea>();
  FeedbackCollector fc(area.get());
  fc.Reset(true);
  fc.BeginCall(0, 0, "f", true);
  for (size_t i = 0; i < kEventCapacity + 10; ++i) fc.OnFree(i);
  auto r = Harvest(*area, &fc.touched(), {"f"});
  EXPECT_EQ(r.resource_log.size(), kEventCapacity - 1);
  EXPECT_EQ(r.dropped_events, 11u);
}

TEST(FeedbackTest, ClassifyAddressRules) {
  std::vector<std::pair<uint64_t, uint64_t>> guards = {{0x20000, 4096}};
  EXPECT_EQ(ClassifyAddress(0, 4096, guards), FaultKind::kNullDeref);
  EXPECT_EQ(ClassifyAddress(0x20000, 4096, guards), FaultKind::kCanaryHit);
  EXPECT_EQ(ClassifyAddress(0x20fff, 4096, guards), FaultKind::kCanaryHit);
  EXPECT_EQ(ClassifyAddress(0x21000, 4096, guards), FaultKind::kInvalidAccess);
}

}  // namespace
}  // namespace apifuzz

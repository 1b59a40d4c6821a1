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


// Runtime feedback: what one execution of a program observed.
//
// Events are first written into a FeedbackArea, a flat block that can live
// in memory shared with a child process: the coverage map, then a bounded
// event log, then the exit record. Harvest() turns an area into a report.

#ifndef APIFUZZ_FEEDBACK_H_
#define APIFUZZ_FEEDBACK_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "apifuzz/hooks.h"
#include "apifuzz/value.h"

namespace apifuzz {

enum class FaultKind : uint32_t {
  kNullDeref,
  kCanaryHit,
  kInvalidAccess,
  kTimeout,
  kOom,
  kAbort,
};

enum class ExitKind : uint32_t {
  kOk,
  kAssertFailed,
  kUseAfterFree,
  kFault,
  kTimeout,
  kOom,
};

std::string_view FaultKindName(FaultKind k);
std::string_view ExitKindName(ExitKind k);

struct Fault {
  FaultKind kind = FaultKind::kInvalidAccess;
  uint64_t address = 0;
  // (context hash of the faulting function << 32) | site inside it.
  uint64_t crash_site = 0;
  std::string function;
  StmtIndex stmt = 0;
  bool operator==(const Fault&) const = default;
};

inline uint64_t MakeCrashSite(std::string_view function, uint32_t site) {
  return (static_cast<uint64_t>(ContextHash(function)) << 32) | site;
}

struct CoverageEntry {
  uint32_t key = 0;
  uint32_t hits = 0;
  // Statement during which the key was first hit.
  StmtIndex first_stmt = 0;
  bool operator==(const CoverageEntry&) const = default;
};

struct CmpEvent {
  uint64_t a = 0;
  uint64_t b = 0;
  uint32_t width = 0;
  StmtIndex stmt = 0;
  bool operator==(const CmpEvent&) const = default;
};

struct ResourceEvent {
  enum class Kind { kAlloc, kFree, kFileOpen };
  Kind kind = Kind::kAlloc;
  uint64_t address = 0;
  uint64_t size = 0;
  std::string name;
  StmtIndex stmt = 0;
  bool operator==(const ResourceEvent&) const = default;
};

// Memory the executor materialized for a statement.
struct MemoryRegion {
  StmtIndex stmt = 0;
  uint64_t base = 0;
  uint64_t size = 0;
  bool operator==(const MemoryRegion&) const = default;
};

// Begin/end markers of one executed call.
struct CallRecord {
  StmtIndex stmt = 0;
  std::string function;
  bool returned = false;
  uint64_t ret = 0;
  // C strings passed in string-typed parameters, by parameter position.
  std::vector<std::pair<size_t, std::string>> arg_strings;
  bool operator==(const CallRecord&) const = default;
};

struct FeedbackReport {
  std::vector<CoverageEntry> coverage;  // sorted by key
  ExitKind exit = ExitKind::kOk;
  // Statement that ended the run early; meaningless for kOk.
  StmtIndex exit_stmt = 0;
  std::optional<Fault> fault;
  std::vector<CmpEvent> cmp_log;
  std::vector<ResourceEvent> resource_log;
  std::vector<CallRecord> calls;
  std::vector<MemoryRegion> regions;
  uint64_t virtual_time = 0;
  uint64_t dropped_events = 0;

  bool IsCrash() const {
    return exit == ExitKind::kFault || exit == ExitKind::kTimeout || exit == ExitKind::kOom;
  }
  bool NormalExit() const { return exit == ExitKind::kOk || exit == ExitKind::kAssertFailed; }
  std::vector<uint32_t> CoverageKeys() const;
  bool operator==(const FeedbackReport&) const = default;
};

// Shared layout.
inline constexpr size_t kEventNameBytes = 96;
inline constexpr size_t kEventCapacity = 8192;
inline constexpr size_t kMaxCmpEvents = 1024;

struct RawEvent {
  enum Kind : uint8_t {
    kCmp,
    kAlloc,
    kFree,
    kFileOpen,
    kRegion,
    kGuard,
    kCallBegin,
    kCallEnd,
    kArgString,
  };
  uint8_t kind = 0;
  uint8_t pad[3] = {};
  uint32_t stmt = 0;
  uint64_t a = 0;
  uint64_t b = 0;
  uint32_t width = 0;
  uint32_t name_len = 0;
  char name[kEventNameBytes] = {};
};
static_assert(sizeof(RawEvent) == 128);

struct ExitRecord {
  uint32_t exit = 0;  // ExitKind
  uint32_t stmt = 0;
  uint32_t has_fault = 0;
  uint32_t fault_kind = 0;  // FaultKind
  uint64_t address = 0;
  uint64_t crash_site = 0;
  uint64_t virtual_time = 0;
  uint32_t function_index = 0;
  int32_t signal = 0;
  uint64_t pc = 0;
  uint32_t finished = 0;
  uint32_t in_call = 0;
};

struct FeedbackArea {
  uint32_t coverage[kCoverageSlots];
  uint32_t event_count;
  uint32_t dropped;
  uint32_t cmp_count;
  uint32_t pad;
  RawEvent events[kEventCapacity];
  ExitRecord exit;
  uint32_t first_stmt[kCoverageSlots];
};

// Hook sink that writes into a FeedbackArea. Branch events count only while
// a tracked call is running; other events count during any call.
class FeedbackCollector : public HookSink {
 public:
  explicit FeedbackCollector(FeedbackArea* area) : area_(area) {}

  // Clears what the previous run wrote. With `full` the whole coverage map
  // is wiped, otherwise only the keys this collector touched.
  void Reset(bool full);

  void BeginCall(StmtIndex stmt, uint32_t function_index, std::string_view function,
                 bool tracked);
  void EndCall(uint64_t ret);
  bool in_call() const { return in_call_; }

  void NoteRegion(StmtIndex stmt, uint64_t base, uint64_t size);
  void NoteGuard(uint64_t base, uint64_t size);
  void NoteArgString(StmtIndex stmt, size_t param, std::string_view s);

  // Allocation events are also forwarded here (target heap tracking).
  void set_resource_listener(HookSink* listener) { listener_ = listener; }

  void OnBranch(uint32_t site) override;
  void OnCmp(uint64_t a, uint64_t b, uint32_t width) override;
  void OnAlloc(uint64_t address, uint64_t size) override;
  void OnFree(uint64_t address) override;
  void OnFileOpen(std::string_view name) override;

  ExitRecord& exit() { return area_->exit; }
  FeedbackArea* area() { return area_; }
  const std::vector<uint32_t>& touched() const { return touched_; }

 private:
  RawEvent* Push(uint8_t kind);

  FeedbackArea* area_;
  HookSink* listener_ = nullptr;
  std::vector<uint32_t> touched_;
  StmtIndex stmt_ = 0;
  uint32_t context_ = 0;
  bool tracked_ = false;
  bool in_call_ = false;
};

// Builds a report from an area. `touched` lists the written coverage keys;
// when null the whole map is scanned. Function names resolve fault records.
FeedbackReport Harvest(const FeedbackArea& area, const std::vector<uint32_t>* touched,
                       const std::vector<std::string>& function_names);

// Guard ranges (base, size) logged in an area.
std::vector<std::pair<uint64_t, uint64_t>> GuardRanges(const FeedbackArea& area);

// Fault kind for a faulting address.
FaultKind ClassifyAddress(uint64_t address, uint64_t near_null,
                          const std::vector<std::pair<uint64_t, uint64_t>>& guards);

}  // namespace apifuzz

#endif  // APIFUZZ_FEEDBACK_H_

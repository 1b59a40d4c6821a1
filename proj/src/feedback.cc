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


#include "apifuzz/feedback.h"

#include <algorithm>
#include <cstring>

namespace apifuzz {

std::string_view FaultKindName(FaultKind k) {
  switch (k) {
    case FaultKind::kNullDeref: return "null-deref";
    case FaultKind::kCanaryHit: return "canary-hit";
    case FaultKind::kInvalidAccess: return "invalid-access";
    case FaultKind::kTimeout: return "timeout";
    case FaultKind::kOom: return "oom";
    case FaultKind::kAbort: return "abort";
  }
  return "?";
}

std::string_view ExitKindName(ExitKind k) {
  switch (k) {
    case ExitKind::kOk: return "ok";
    case ExitKind::kAssertFailed: return "assert-failed";
    case ExitKind::kUseAfterFree: return "use-after-free";
    case ExitKind::kFault: return "fault";
    case ExitKind::kTimeout: return "timeout";
    case ExitKind::kOom: return "oom";
  }
  return "?";
}

std::vector<uint32_t> FeedbackReport::CoverageKeys() const {
  std::vector<uint32_t> keys;
  keys.reserve(coverage.size());
  for (const auto& e : coverage) keys.push_back(e.key);
  return keys;
}

void FeedbackCollector::Reset(bool full) {
  if (full) {
    std::memset(area_->coverage, 0, sizeof(area_->coverage));
  } else {
    for (uint32_t k : touched_) area_->coverage[k] = 0;
  }
  touched_.clear();
  area_->event_count = 0;
  area_->dropped = 0;
  area_->cmp_count = 0;
  area_->exit = ExitRecord{};
  in_call_ = false;
  tracked_ = false;
}

RawEvent* FeedbackCollector::Push(uint8_t kind) {
  if (area_->event_count >= kEventCapacity) {
    ++area_->dropped;
    return nullptr;
  }
  RawEvent* e = &area_->events[area_->event_count++];
  *e = RawEvent{};
  e->kind = kind;
  e->stmt = stmt_;
  return e;
}

namespace {

void SetName(RawEvent* e, std::string_view s) {
  size_t n = std::min(s.size(), kEventNameBytes);
  std::memcpy(e->name, s.data(), n);
  e->name_len = static_cast<uint32_t>(n);
}

}  // namespace

void FeedbackCollector::BeginCall(StmtIndex stmt, uint32_t function_index,
                                  std::string_view function, bool tracked) {
  stmt_ = stmt;
  context_ = ContextHash(function);
  tracked_ = tracked;
  in_call_ = true;
  area_->exit.in_call = 1;
  area_->exit.function_index = function_index;
  area_->exit.stmt = stmt;
  if (RawEvent* e = Push(RawEvent::kCallBegin)) e->width = function_index;
}

void FeedbackCollector::EndCall(uint64_t ret) {
  in_call_ = false;
  tracked_ = false;
  area_->exit.in_call = 0;
  if (RawEvent* e = Push(RawEvent::kCallEnd)) e->a = ret;
}

void FeedbackCollector::NoteRegion(StmtIndex stmt, uint64_t base, uint64_t size) {
  if (RawEvent* e = Push(RawEvent::kRegion)) {
    e->stmt = stmt;
    e->a = base;
    e->b = size;
  }
}

void FeedbackCollector::NoteGuard(uint64_t base, uint64_t size) {
  if (RawEvent* e = Push(RawEvent::kGuard)) {
    e->a = base;
    e->b = size;
  }
}

void FeedbackCollector::NoteArgString(StmtIndex stmt, size_t param, std::string_view s) {
  if (RawEvent* e = Push(RawEvent::kArgString)) {
    e->stmt = stmt;
    e->width = static_cast<uint32_t>(param);
    SetName(e, s);
  }
}

void FeedbackCollector::OnBranch(uint32_t site) {
  if (!in_call_ || !tracked_) return;
  uint32_t key = CoverageKey(site, context_);
  uint32_t& slot = area_->coverage[key];
  if (slot == 0) {
    touched_.push_back(key);
    area_->first_stmt[key] = stmt_;
  }
  if (slot != UINT32_MAX) ++slot;
}

void FeedbackCollector::OnCmp(uint64_t a, uint64_t b, uint32_t width) {
  if (!in_call_ || area_->cmp_count >= kMaxCmpEvents) return;
  if (RawEvent* e = Push(RawEvent::kCmp)) {
    ++area_->cmp_count;
    e->a = a;
    e->b = b;
    e->width = width;
  }
}

void FeedbackCollector::OnAlloc(uint64_t address, uint64_t size) {
  if (!in_call_) return;
  if (listener_ != nullptr) listener_->OnAlloc(address, size);
  if (RawEvent* e = Push(RawEvent::kAlloc)) {
    e->a = address;
    e->b = size;
  }
}

void FeedbackCollector::OnFree(uint64_t address) {
  if (!in_call_) return;
  if (listener_ != nullptr) listener_->OnFree(address);
  if (RawEvent* e = Push(RawEvent::kFree)) e->a = address;
}

void FeedbackCollector::OnFileOpen(std::string_view name) {
  if (!in_call_) return;
  if (RawEvent* e = Push(RawEvent::kFileOpen)) SetName(e, name);
}

std::vector<std::pair<uint64_t, uint64_t>> GuardRanges(const FeedbackArea& area) {
  std::vector<std::pair<uint64_t, uint64_t>> out;
  uint32_t n = std::min<uint32_t>(area.event_count, kEventCapacity);
  for (uint32_t i = 0; i < n; ++i) {
    if (area.events[i].kind == RawEvent::kGuard) out.emplace_back(area.events[i].a, area.events[i].b);
  }
  return out;
}

FaultKind ClassifyAddress(uint64_t address, uint64_t near_null,
                          const std::vector<std::pair<uint64_t, uint64_t>>& guards) {
  if (address < near_null) return FaultKind::kNullDeref;
  for (const auto& [base, size] : guards) {
    if (address >= base && address - base < size) return FaultKind::kCanaryHit;
  }
  return FaultKind::kInvalidAccess;
}

FeedbackReport Harvest(const FeedbackArea& area, const std::vector<uint32_t>* touched,
                       const std::vector<std::string>& function_names) {
  FeedbackReport r;
  auto add_key = [&](uint32_t k) {
    if (area.coverage[k] != 0) r.coverage.push_back({k, area.coverage[k], area.first_stmt[k]});
  };
  if (touched != nullptr) {
    for (uint32_t k : *touched) add_key(k);
    std::sort(r.coverage.begin(), r.coverage.end(),
              [](const CoverageEntry& a, const CoverageEntry& b) { return a.key < b.key; });
  } else {
    for (uint32_t k = 0; k < kCoverageSlots; ++k) add_key(k);
  }
  auto name_of = [&](uint32_t idx) {
    return idx < function_names.size() ? function_names[idx] : std::string("?");
  };
  uint32_t n = std::min<uint32_t>(area.event_count, kEventCapacity);
  for (uint32_t i = 0; i < n; ++i) {
    const RawEvent& e = area.events[i];
    std::string name(e.name, std::min<size_t>(e.name_len, kEventNameBytes));
    switch (e.kind) {
      case RawEvent::kCmp:
        r.cmp_log.push_back({e.a, e.b, e.width, e.stmt});
        break;
      case RawEvent::kAlloc:
        r.resource_log.push_back({ResourceEvent::Kind::kAlloc, e.a, e.b, "", e.stmt});
        break;
      case RawEvent::kFree:
        r.resource_log.push_back({ResourceEvent::Kind::kFree, e.a, 0, "", e.stmt});
        break;
      case RawEvent::kFileOpen:
        r.resource_log.push_back({ResourceEvent::Kind::kFileOpen, 0, 0, std::move(name), e.stmt});
        break;
      case RawEvent::kRegion:
        r.regions.push_back({e.stmt, e.a, e.b});
        break;
      case RawEvent::kGuard:
        break;
      case RawEvent::kCallBegin:
        r.calls.push_back(CallRecord{e.stmt, name_of(e.width), false, 0, {}});
        break;
      case RawEvent::kCallEnd:
        if (!r.calls.empty()) {
          r.calls.back().returned = true;
          r.calls.back().ret = e.a;
        }
        break;
      case RawEvent::kArgString:
        // Argument strings are logged just before the call they belong to.
        r.calls.push_back(CallRecord{e.stmt, "", false, 0, {}});
        r.calls.back().arg_strings.emplace_back(e.width, std::move(name));
        break;
    }
  }
  // Fold argument-string placeholders into the following call record.
  std::vector<CallRecord> calls;
  std::vector<std::pair<size_t, std::string>> pending;
  for (auto& c : r.calls) {
    if (c.function.empty()) {
      for (auto& a : c.arg_strings) pending.push_back(std::move(a));
      continue;
    }
    c.arg_strings = std::move(pending);
    pending.clear();
    calls.push_back(std::move(c));
  }
  r.calls = std::move(calls);

  const ExitRecord& x = area.exit;
  r.exit = static_cast<ExitKind>(x.exit);
  r.exit_stmt = x.stmt;
  r.virtual_time = x.virtual_time;
  r.dropped_events = area.dropped;
  if (x.has_fault) {
    r.fault = Fault{static_cast<FaultKind>(x.fault_kind), x.address, x.crash_site,
                    name_of(x.function_index), x.stmt};
  }
  return r;
}

}  // namespace apifuzz

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


// Hook surface shared by instrumented targets and the executor.
//
// Targets report control flow and resource use through five C entry points.
// Events are routed to the sink installed on the calling thread; with no
// sink installed they are dropped.

#ifndef APIFUZZ_HOOKS_H_
#define APIFUZZ_HOOKS_H_

#include <cstdint>
#include <string_view>

#include "apifuzz/hop.h"

namespace apifuzz {

inline constexpr uint32_t kCoverageSlots = 1u << 16;

// 32-bit FNV-1a of a function name; the context of branch events.
uint32_t ContextHash(std::string_view function_name);

inline uint32_t CoverageKey(uint32_t site, uint32_t context) {
  return (site ^ context) & (kCoverageSlots - 1);
}

class HookSink {
 public:
  virtual ~HookSink() = default;
  virtual void OnBranch(uint32_t site) = 0;
  virtual void OnCmp(uint64_t a, uint64_t b, uint32_t width) = 0;
  virtual void OnAlloc(uint64_t address, uint64_t size) = 0;
  virtual void OnFree(uint64_t address) = 0;
  virtual void OnFileOpen(std::string_view name) = 0;
};

// Installs `sink` for the current thread and returns the previous one.
HookSink* SetThreadHookSink(HookSink* sink);
HookSink* ThreadHookSink();

class ScopedHookSink {
 public:
  explicit ScopedHookSink(HookSink* sink) : prev_(SetThreadHookSink(sink)) {}
  ~ScopedHookSink() { SetThreadHookSink(prev_); }
  ScopedHookSink(const ScopedHookSink&) = delete;
  ScopedHookSink& operator=(const ScopedHookSink&) = delete;

 private:
  HookSink* prev_;
};

}  // namespace apifuzz

#endif  // APIFUZZ_HOOKS_H_

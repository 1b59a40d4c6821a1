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


#include "apifuzz/hooks.h"

#include <cstring>

namespace apifuzz {
namespace {

thread_local HookSink* g_sink = nullptr;

}  // namespace

uint32_t ContextHash(std::string_view function_name) {
  uint32_t h = 2166136261u;
  for (unsigned char c : function_name) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

HookSink* SetThreadHookSink(HookSink* sink) {
  HookSink* prev = g_sink;
  g_sink = sink;
  return prev;
}

HookSink* ThreadHookSink() { return g_sink; }

}  // namespace apifuzz

extern "C" {

void hop_branch(uint32_t site) {
  if (auto* s = apifuzz::ThreadHookSink()) s->OnBranch(site);
}

void hop_cmp(uint64_t a, uint64_t b, uint32_t width) {
  if (auto* s = apifuzz::ThreadHookSink()) s->OnCmp(a, b, width);
}

void hop_alloc(void* p, uint64_t n) {
  if (auto* s = apifuzz::ThreadHookSink()) s->OnAlloc(reinterpret_cast<uintptr_t>(p), n);
}

void hop_free(void* p) {
  if (auto* s = apifuzz::ThreadHookSink()) s->OnFree(reinterpret_cast<uintptr_t>(p));
}

void hop_fopen(const char* name) {
  if (name == nullptr) return;
  if (auto* s = apifuzz::ThreadHookSink()) s->OnFileOpen(std::string_view(name, strnlen(name, 4096)));
}

uint64_t apifuzz_zero_stub(void) { return 0; }

}  // extern "C"

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


// C entry points for instrumented targets. Every branch site calls
// hop_branch with a literal site number; comparisons, heap chunks and
// opened files are reported through the other four.

#ifndef APIFUZZ_HOP_H_
#define APIFUZZ_HOP_H_

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

void hop_branch(uint32_t site);
void hop_cmp(uint64_t a, uint64_t b, uint32_t width);
void hop_alloc(void* p, uint64_t n);
void hop_free(void* p);
void hop_fopen(const char* name);

// Function-pointer stub handed to targets; returns zero.
uint64_t apifuzz_zero_stub(void);

#ifdef __cplusplus
}
#endif

#endif  // APIFUZZ_HOP_H_

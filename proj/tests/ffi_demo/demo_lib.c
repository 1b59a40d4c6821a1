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


// Instrumented shared library for the foreign-function backend tests.

#include <stdio.h>
#include <stdlib.h>

#include "apifuzz/hop.h"

int demo_sum(const char* buf, int len) {
  if (buf == NULL) {
    hop_branch(1);
    return 0;
  }
  int total = 0;
  for (int i = 0; i < len; ++i) {
    hop_branch(2);
    total += buf[i];
  }
  return total;
}

int demo_peek(const int* p) {
  hop_branch(1);
  return *p;
}

double demo_scale(double x, int k, float y) {
  hop_branch(k > 0 ? 1 : 2);
  return x * k + y;
}

float demo_half(float x) { return x / 2; }

long demo_mix(int a, long b, unsigned char c, short d, double e, int* out) {
  long r = a + b + c + d + (long)e;
  if (out != NULL) {
    hop_branch(1);
    *out = (int)r;
  }
  return r;
}

void* demo_new(int n) {
  if (n <= 0 || n > 4096) {
    hop_branch(1);
    return NULL;
  }
  hop_branch(2);
  int* p = (int*)calloc((size_t)n, sizeof(int));
  hop_alloc(p, (uint64_t)n * sizeof(int));
  return p;
}

int demo_use(void* p) {
  if (p == NULL) return -1;
  hop_branch(1);
  return ((int*)p)[0];
}

void demo_free(void* p) {
  if (p == NULL) return;
  hop_free(p);
  free(p);
}

int demo_spin(int n) {
  volatile int spin = 1;
  if (n == 7) {
    hop_branch(1);
    while (spin) {
    }
  }
  return n;
}

int demo_open(const char* path) {
  hop_fopen(path);
  FILE* f = fopen(path, "rb");
  if (f == NULL) {
    hop_branch(1);
    return -1;
  }
  int c = fgetc(f);
  fclose(f);
  hop_branch(c == 'x' ? 2 : 3);
  return c;
}

int demo_abort(int x) {
  hop_cmp((uint64_t)x, 3, 32);
  if (x == 3) abort();
  return x;
}

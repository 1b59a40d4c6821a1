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


#include "apifuzz/backend.h"

#include <bit>
#include <fstream>
#include <sstream>

namespace apifuzz {

double CallContext::F64(size_t i) const { return std::bit_cast<double>(Arg(i)); }

void CallContext::Branch(uint32_t site) {
  sink_.OnBranch(site);
  clock_.Tick(1, site);
}

bool CallContext::Cmp(uint64_t a, uint64_t b, uint32_t width) {
  sink_.OnCmp(a, b, width);
  return a == b;
}

uint8_t CallContext::Read8(uint64_t address, uint32_t site) {
  uint8_t v = 0;
  memory_.Read(address, &v, 1, site);
  return v;
}

uint32_t CallContext::Read32(uint64_t address, uint32_t site) {
  uint32_t v = 0;
  memory_.Read(address, &v, 4, site);
  return v;
}

uint64_t CallContext::Read64(uint64_t address, uint32_t site) {
  uint64_t v = 0;
  memory_.Read(address, &v, 8, site);
  return v;
}

void CallContext::Write8(uint64_t address, uint8_t v, uint32_t site) {
  memory_.Write(address, &v, 1, site);
}

void CallContext::Write32(uint64_t address, uint32_t v, uint32_t site) {
  memory_.Write(address, &v, 4, site);
}

void CallContext::Write64(uint64_t address, uint64_t v, uint32_t site) {
  memory_.Write(address, &v, 8, site);
}

std::string CallContext::ReadString(uint64_t address, uint32_t site, size_t max) {
  std::string out;
  for (size_t i = 0; i < max; ++i) {
    uint8_t c = Read8(address + i, site);
    if (c == 0) break;
    out.push_back(static_cast<char>(c));
  }
  clock_.Tick(out.size() / 16, site);
  return out;
}

uint64_t CallContext::Malloc(uint64_t n, uint32_t site) {
  uint64_t p = memory_.Malloc(n, site);
  sink_.OnAlloc(p, n);
  return p;
}

void CallContext::Free(uint64_t address, uint32_t site) {
  memory_.Free(address, site);
  if (address != 0) sink_.OnFree(address);
}

std::optional<std::string> CallContext::OpenFile(uint64_t path, uint32_t site) {
  std::string name = ReadString(path, site);
  sink_.OnFileOpen(name);
  std::string prefix = std::string(files_dir_) + "/";
  if (files_dir_.empty() || name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0 ||
      name.find("..") != std::string::npos) {
    return std::nullopt;
  }
  std::ifstream in(name, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

uint64_t CallContext::CallFunction(uint64_t fn, uint32_t site) {
  if (fn == SimMemory::kStubAddress) return 0;
  throw TargetTrap{memory_.Classify(fn), fn, site};
}

void CallContext::Abort(uint32_t site) { throw TargetTrap{FaultKind::kAbort, 0, site}; }

SyntheticFn SyntheticLibrary::Find(std::string_view fn) const {
  for (const auto& f : functions) {
    if (f.name == fn) return f.fn;
  }
  return nullptr;
}

}  // namespace apifuzz

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


// In-process target surface.
//
// A synthetic target function receives a CallContext holding its raw
// arguments and reaches memory, files, and the hook sink only through it.
// Arguments are 64-bit words: integers zero-extended from their width,
// floats as IEEE bits, pointers as simulated addresses.

#ifndef APIFUZZ_BACKEND_H_
#define APIFUZZ_BACKEND_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apifuzz/hooks.h"
#include "apifuzz/memory.h"

namespace apifuzz {

// Counts simulated work; running past the budget raises a timeout trap.
class VirtualClock {
 public:
  explicit VirtualClock(uint64_t budget) : budget_(budget) {}
  void Tick(uint64_t n, uint32_t site) {
    if (n > budget_ - now_) {
      now_ = budget_;
      throw TargetTrap{FaultKind::kTimeout, 0, site};
    }
    now_ += n;
  }
  uint64_t now() const { return now_; }

 private:
  uint64_t budget_;
  uint64_t now_ = 0;
};

class CallContext {
 public:
  CallContext(SimMemory& memory, HookSink& sink, VirtualClock& clock,
              std::span<const uint64_t> args, std::string_view files_dir)
      : memory_(memory), sink_(sink), clock_(clock), args_(args), files_dir_(files_dir) {}

  size_t arg_count() const { return args_.size(); }
  uint64_t Arg(size_t i) const { return i < args_.size() ? args_[i] : 0; }
  int32_t I32(size_t i) const { return static_cast<int32_t>(static_cast<uint32_t>(Arg(i))); }
  uint32_t U32(size_t i) const { return static_cast<uint32_t>(Arg(i)); }
  int64_t I64(size_t i) const { return static_cast<int64_t>(Arg(i)); }
  double F64(size_t i) const;
  uint64_t Ptr(size_t i) const { return Arg(i); }

  // Records a branch at `site` and spends one tick.
  void Branch(uint32_t site);
  // Records a comparison; returns a == b.
  bool Cmp(uint64_t a, uint64_t b, uint32_t width);
  void Tick(uint64_t n, uint32_t site) { clock_.Tick(n, site); }

  uint8_t Read8(uint64_t address, uint32_t site);
  uint32_t Read32(uint64_t address, uint32_t site);
  uint64_t Read64(uint64_t address, uint32_t site);
  void Write8(uint64_t address, uint8_t v, uint32_t site);
  void Write32(uint64_t address, uint32_t v, uint32_t site);
  void Write64(uint64_t address, uint64_t v, uint32_t site);
  // Reads a NUL-terminated string byte by byte; stops after `max` bytes.
  std::string ReadString(uint64_t address, uint32_t site, size_t max = 4096);

  uint64_t Malloc(uint64_t n, uint32_t site);
  void Free(uint64_t address, uint32_t site);

  // Opens the file named by the C string at `path` for reading. Only files
  // inside the sandbox are visible.
  std::optional<std::string> OpenFile(uint64_t path, uint32_t site);

  // Calls through a function pointer argument.
  uint64_t CallFunction(uint64_t fn, uint32_t site);

  [[noreturn]] void Abort(uint32_t site);

  SimMemory& memory() { return memory_; }

 private:
  SimMemory& memory_;
  HookSink& sink_;
  VirtualClock& clock_;
  std::span<const uint64_t> args_;
  std::string_view files_dir_;
};

using SyntheticFn = uint64_t (*)(CallContext&);

struct SyntheticFunction {
  std::string name;
  SyntheticFn fn = nullptr;
};

struct SyntheticLibrary {
  std::string name;
  std::vector<SyntheticFunction> functions;

  SyntheticFn Find(std::string_view fn) const;
};

}  // namespace apifuzz

#endif  // APIFUZZ_BACKEND_H_

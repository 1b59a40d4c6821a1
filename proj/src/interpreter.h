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


// Statement interpreter shared by the executor backends.

#ifndef APIFUZZ_SRC_INTERPRETER_H_
#define APIFUZZ_SRC_INTERPRETER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "apifuzz/executor.h"
#include "apifuzz/feedback.h"
#include "apifuzz/memory.h"

namespace apifuzz {

class Invoker {
 public:
  virtual ~Invoker() = default;
  virtual uint64_t Invoke(size_t function_index, std::span<const uint64_t> args) = 0;
};

class Interpreter {
 public:
  Interpreter(const Manifest& m, const ExecConfig& cfg, const std::string& files_dir,
              Memory& memory, FeedbackCollector& feedback, Invoker& invoker)
      : m_(m), reg_(m.types()), cfg_(cfg), files_dir_(files_dir), mem_(memory),
        fb_(feedback), invoker_(invoker) {}

  // Runs to the end or to an early exit recorded in the exit record.
  // Target traps propagate to the caller.
  void Run(const Program& p);

 private:
  void Exit(ExitKind kind, StmtIndex stmt);
  std::optional<GuardedBlock> Alloc(StmtIndex stmt, uint64_t size);
  bool WriteValue(uint64_t address, const Value& v);
  std::optional<std::pair<uint64_t, TypeId>> PlaceAddress(StmtIndex index, const FieldPath& path);
  bool RunLoad(const Statement& s);
  bool RunCall(const Statement& s);
  bool RunUpdate(const Statement& s);
  bool RunAssert(const Statement& s);
  bool RunFile(const Statement& s);
  uint64_t ByteSizeOf(TypeId t) const;

  const Manifest& m_;
  const TypeRegistry& reg_;
  const ExecConfig& cfg_;
  const std::string& files_dir_;
  Memory& mem_;
  FeedbackCollector& fb_;
  Invoker& invoker_;
  const Program* p_ = nullptr;
  // Address and type of each statement's value, by position.
  std::vector<uint64_t> slot_;
  std::vector<TypeId> slot_type_;
};

}  // namespace apifuzz

#endif  // APIFUZZ_SRC_INTERPRETER_H_

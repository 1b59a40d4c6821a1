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


// Runs programs against a target and reports what happened.
//
// Each execution starts from a fresh address space. Loads are materialized
// into guarded blocks whose last byte abuts a guard region, calls go to the
// backend, and faults end the run without disturbing the caller.

#ifndef APIFUZZ_EXECUTOR_H_
#define APIFUZZ_EXECUTOR_H_

#include <cstdint>
#include <memory>
#include <string>

#include "absl/status/statusor.h"
#include "apifuzz/backend.h"
#include "apifuzz/feedback.h"
#include "apifuzz/manifest.h"
#include "apifuzz/program.h"

namespace apifuzz {

// Simulated ticks per millisecond of the timeout.
inline constexpr uint64_t kTicksPerMs = 1000;

struct ExecConfig {
  uint32_t timeout_ms = 1000;
  uint64_t memory_limit_bytes = 512ull << 20;
  // Empty: a private temporary directory, removed with the executor.
  std::string sandbox_dir;
  uint64_t canary_page_bytes = kDefaultGuardBytes;
  uint64_t rng_seed = 1;
  uint64_t near_null = kNearNullThreshold;

  absl::Status Check() const;
};

class Executor {
 public:
  virtual ~Executor();
  Executor(const Executor&) = delete;
  Executor& operator=(const Executor&) = delete;

  // `p` must validate against manifest().
  FeedbackReport Execute(const Program& p);
  // Validates first.
  absl::StatusOr<FeedbackReport> ExecuteChecked(const Program& p);

  const Manifest& manifest() const { return manifest_; }
  const ExecConfig& config() const { return cfg_; }
  uint64_t execs() const { return execs_; }
  const std::string& sandbox_dir() const { return sandbox_; }
  const std::string& files_dir() const { return files_; }

 protected:
  Executor(const Manifest& m, ExecConfig cfg);
  absl::Status SetUpSandbox();
  virtual FeedbackReport Run(const Program& p) = 0;

  const Manifest& manifest_;
  ExecConfig cfg_;
  std::vector<std::string> function_names_;

 private:
  void RemoveFiles(const Program& p);

  std::string sandbox_;
  std::string files_;
  bool owns_sandbox_ = false;
  uint64_t execs_ = 0;
};

// In-process backend. Every manifest function must exist in `lib`.
absl::StatusOr<std::unique_ptr<Executor>> MakeSyntheticExecutor(const Manifest& m,
                                                                const SyntheticLibrary& lib,
                                                                ExecConfig cfg);

// Shared-library backend: each execution runs in a forked child. Functions
// take at most six integer-class and eight floating-point arguments, none
// of them records passed by value.
absl::StatusOr<std::unique_ptr<Executor>> MakeFfiExecutor(const Manifest& m,
                                                          const std::string& library_path,
                                                          ExecConfig cfg);

}  // namespace apifuzz

#endif  // APIFUZZ_EXECUTOR_H_

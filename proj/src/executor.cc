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


#include "apifuzz/executor.h"

#include <stdlib.h>

#include <filesystem>
#include <system_error>

#include "absl/strings/str_cat.h"
#include "apifuzz/dsl.h"
#include "interpreter.h"

namespace apifuzz {

absl::Status ExecConfig::Check() const {
  if (timeout_ms == 0 || memory_limit_bytes == 0 || canary_page_bytes == 0 || near_null == 0) {
    return absl::InvalidArgumentError("execution limits must be positive");
  }
  if (canary_page_bytes % 4096 != 0) {
    return absl::InvalidArgumentError("canary size must be a multiple of 4096");
  }
  return absl::OkStatus();
}

Executor::Executor(const Manifest& m, ExecConfig cfg) : manifest_(m), cfg_(std::move(cfg)) {
  for (const auto& f : m.functions()) function_names_.push_back(f.name);
}

Executor::~Executor() {
  if (owns_sandbox_) {
    std::error_code ec;
    std::filesystem::remove_all(sandbox_, ec);
  }
}

absl::Status Executor::SetUpSandbox() {
  if (auto st = cfg_.Check(); !st.ok()) return st;
  std::error_code ec;
  if (cfg_.sandbox_dir.empty()) {
    std::string tmpl = (std::filesystem::temp_directory_path(ec) / "apifuzz-XXXXXX").string();
    if (mkdtemp(tmpl.data()) == nullptr) {
      return absl::InternalError("cannot create a sandbox directory");
    }
    sandbox_ = tmpl;
    owns_sandbox_ = true;
  } else {
    sandbox_ = std::filesystem::absolute(cfg_.sandbox_dir, ec).lexically_normal().string();
    if (!sandbox_.empty() && sandbox_.back() == '/') sandbox_.pop_back();
  }
  files_ = sandbox_ + "/files";
  std::filesystem::create_directories(files_, ec);
  if (ec) return absl::InternalError(absl::StrCat("cannot create ", files_, ": ", ec.message()));
  return absl::OkStatus();
}

void Executor::RemoveFiles(const Program& p) {
  for (const auto& s : p.statements()) {
    if (!s.is_file()) continue;
    std::error_code ec;
    std::filesystem::remove(absl::StrCat(files_, "/", s.index), ec);
  }
}

FeedbackReport Executor::Execute(const Program& p) {
  ++execs_;
  FeedbackReport r = Run(p);
  RemoveFiles(p);
  return r;
}

absl::StatusOr<FeedbackReport> Executor::ExecuteChecked(const Program& p) {
  auto diags = ValidateProgram(p, manifest_);
  if (!diags.empty()) return absl::InvalidArgumentError(FormatDiagnostics(diags));
  return Execute(p);
}

namespace {

class SyntheticInvoker : public Invoker {
 public:
  SyntheticInvoker(const std::vector<SyntheticFn>& fns, SimMemory& memory, HookSink& sink,
                   VirtualClock& clock, const std::string& files_dir)
      : fns_(fns), memory_(memory), sink_(sink), clock_(clock), files_dir_(files_dir) {}

  uint64_t Invoke(size_t function_index, std::span<const uint64_t> args) override {
    CallContext ctx(memory_, sink_, clock_, args, files_dir_);
    return fns_[function_index](ctx);
  }

 private:
  const std::vector<SyntheticFn>& fns_;
  SimMemory& memory_;
  HookSink& sink_;
  VirtualClock& clock_;
  const std::string& files_dir_;
};

class SyntheticExecutor : public Executor {
 public:
  SyntheticExecutor(const Manifest& m, std::vector<SyntheticFn> fns, ExecConfig cfg)
      : Executor(m, std::move(cfg)),
        fns_(std::move(fns)),
        area_(std::make_unique<FeedbackArea>()),
        collector_(area_.get()) {
    collector_.Reset(true);
  }

  absl::Status Init() { return SetUpSandbox(); }

 protected:
  FeedbackReport Run(const Program& p) override {
    collector_.Reset(false);
    SimMemory memory(cfg_.canary_page_bytes, cfg_.memory_limit_bytes, cfg_.near_null);
    VirtualClock clock(uint64_t{cfg_.timeout_ms} * kTicksPerMs);
    SyntheticInvoker invoker(fns_, memory, collector_, clock, files_dir());
    Interpreter interp(manifest_, cfg_, files_dir(), memory, collector_, invoker);
    ExitRecord& x = collector_.exit();
    auto record = [&](FaultKind kind, uint64_t address, uint32_t site) {
      x.has_fault = 1;
      x.fault_kind = static_cast<uint32_t>(kind);
      x.address = address;
      x.crash_site = MakeCrashSite(function_names_[x.function_index], site);
      ExitKind exit = ExitKind::kFault;
      if (kind == FaultKind::kTimeout) exit = ExitKind::kTimeout;
      if (kind == FaultKind::kOom) exit = ExitKind::kOom;
      x.exit = static_cast<uint32_t>(exit);
    };
    try {
      interp.Run(p);
    } catch (const TargetTrap& t) {
      record(t.kind, t.address, t.site);
    } catch (const std::bad_alloc&) {
      record(FaultKind::kOom, 0, 0);
    }
    x.virtual_time = clock.now();
    x.finished = 1;
    return Harvest(*area_, &collector_.touched(), function_names_);
  }

 private:
  std::vector<SyntheticFn> fns_;
  std::unique_ptr<FeedbackArea> area_;
  FeedbackCollector collector_;
};

}  // namespace

absl::StatusOr<std::unique_ptr<Executor>> MakeSyntheticExecutor(const Manifest& m,
                                                                const SyntheticLibrary& lib,
                                                                ExecConfig cfg) {
  std::vector<SyntheticFn> fns;
  for (const auto& f : m.functions()) {
    SyntheticFn fn = lib.Find(f.name);
    if (fn == nullptr) {
      return absl::NotFoundError(
          absl::StrCat("library '", lib.name, "' has no function '", f.name, "'"));
    }
    fns.push_back(fn);
  }
  auto ex = std::make_unique<SyntheticExecutor>(m, std::move(fns), std::move(cfg));
  if (auto st = ex->Init(); !st.ok()) return st;
  return std::unique_ptr<Executor>(std::move(ex));
}

}  // namespace apifuzz

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


#include <dlfcn.h>
#include <fcntl.h>
#include <signal.h>
#include <sys/mman.h>
#include <sys/wait.h>
#include <time.h>
#include <ucontext.h>
#include <unistd.h>

#include <bit>
#include <chrono>
#include <cstring>

#include "absl/strings/str_cat.h"
#include "apifuzz/executor.h"
#include "interpreter.h"

namespace apifuzz {
namespace {

constexpr size_t kMaxIntArgs = 6;
constexpr size_t kMaxFloatArgs = 8;

using IntFn = uint64_t (*)(uint64_t, uint64_t, uint64_t, uint64_t, uint64_t, uint64_t, double,
                           double, double, double, double, double, double, double);
using FloatFn = double (*)(uint64_t, uint64_t, uint64_t, uint64_t, uint64_t, uint64_t, double,
                           double, double, double, double, double, double, double);

struct Entry {
  void* sym = nullptr;
  std::vector<bool> is_float;
  bool ret_float = false;
  bool ret_f32 = false;
};

class FfiInvoker : public Invoker {
 public:
  explicit FfiInvoker(const std::vector<Entry>& entries) : entries_(entries) {}

  uint64_t Invoke(size_t function_index, std::span<const uint64_t> args) override {
    const Entry& e = entries_[function_index];
    uint64_t i[kMaxIntArgs] = {};
    double d[kMaxFloatArgs] = {};
    size_t ni = 0;
    size_t nd = 0;
    for (size_t k = 0; k < args.size(); ++k) {
      // SysV passes integer and floating arguments in separate register
      // files, so splitting them preserves the callee's view.
      if (e.is_float[k]) {
        d[nd++] = std::bit_cast<double>(args[k]);
      } else {
        i[ni++] = args[k];
      }
    }
    if (e.ret_float) {
      auto fn = reinterpret_cast<FloatFn>(e.sym);
      uint64_t bits = std::bit_cast<uint64_t>(
          fn(i[0], i[1], i[2], i[3], i[4], i[5], d[0], d[1], d[2], d[3], d[4], d[5], d[6], d[7]));
      return e.ret_f32 ? (bits & 0xffffffffu) : bits;
    }
    auto fn = reinterpret_cast<IntFn>(e.sym);
    return fn(i[0], i[1], i[2], i[3], i[4], i[5], d[0], d[1], d[2], d[3], d[4], d[5], d[6], d[7]);
  }

 private:
  const std::vector<Entry>& entries_;
};

FeedbackArea* g_child_area = nullptr;

void ChildSignalHandler(int sig, siginfo_t* info, void* uctx) {
  if (g_child_area != nullptr) {
    g_child_area->exit.signal = sig;
    g_child_area->exit.address = reinterpret_cast<uint64_t>(info->si_addr);
#if defined(__x86_64__)
    g_child_area->exit.pc =
        static_cast<uint64_t>(static_cast<ucontext_t*>(uctx)->uc_mcontext.gregs[REG_RIP]);
#else
    (void)uctx;
#endif
  }
  _exit(128 + sig);
}

void InstallChildHandlers() {
  static char alt_stack[1 << 16];
  stack_t ss{};
  ss.ss_sp = alt_stack;
  ss.ss_size = sizeof(alt_stack);
  sigaltstack(&ss, nullptr);
  struct sigaction sa{};
  sa.sa_sigaction = ChildSignalHandler;
  sa.sa_flags = SA_SIGINFO | SA_ONSTACK;
  sigemptyset(&sa.sa_mask);
  for (int sig : {SIGSEGV, SIGBUS, SIGABRT, SIGFPE, SIGILL, SIGTRAP}) sigaction(sig, &sa, nullptr);
}

class FfiExecutor : public Executor {
 public:
  FfiExecutor(const Manifest& m, ExecConfig cfg) : Executor(m, std::move(cfg)) {}

  ~FfiExecutor() override {
    if (area_ != nullptr) munmap(area_, sizeof(FeedbackArea));
    if (handle_ != nullptr) dlclose(handle_);
  }

  absl::Status Init(const std::string& path) {
    if (auto st = SetUpSandbox(); !st.ok()) return st;
    const TypeRegistry& reg = manifest_.types();
    for (const auto& f : manifest_.functions()) {
      Entry e;
      size_t ni = 0;
      size_t nd = 0;
      for (const auto& p : f.params) {
        TypeKind k = reg.KindOf(p.type);
        if (k != TypeKind::kPrimitive && k != TypeKind::kPointer && k != TypeKind::kFuncPtr) {
          return absl::UnimplementedError(absl::StrCat(
              "parameter '", p.name, "' of '", f.name, "' is passed by value; not callable"));
        }
        bool fl = k == TypeKind::kPrimitive && reg.Resolved(p.type).primitive().is_float;
        e.is_float.push_back(fl);
        (fl ? nd : ni)++;
      }
      if (ni > kMaxIntArgs || nd > kMaxFloatArgs) {
        return absl::UnimplementedError(absl::StrCat("'", f.name, "' has too many arguments"));
      }
      TypeKind rk = reg.KindOf(f.ret);
      if (rk == TypeKind::kRecord || rk == TypeKind::kArray) {
        return absl::UnimplementedError(absl::StrCat("'", f.name, "' returns a record by value"));
      }
      if (rk == TypeKind::kPrimitive && reg.Resolved(f.ret).primitive().is_float) {
        e.ret_float = true;
        e.ret_f32 = reg.Resolved(f.ret).primitive().width_bits == 32;
      }
      entries_.push_back(std::move(e));
    }
    handle_ = dlopen(path.c_str(), RTLD_NOW | RTLD_LOCAL);
    if (handle_ == nullptr) {
      const char* err = dlerror();
      return absl::NotFoundError(absl::StrCat("cannot load ", path, ": ", err ? err : "?"));
    }
    for (size_t i = 0; i < entries_.size(); ++i) {
      const std::string& name = manifest_.functions()[i].name;
      entries_[i].sym = dlsym(handle_, name.c_str());
      if (entries_[i].sym == nullptr) {
        return absl::NotFoundError(absl::StrCat(path, " does not export '", name, "'"));
      }
    }
    void* mem = mmap(nullptr, sizeof(FeedbackArea), PROT_READ | PROT_WRITE,
                     MAP_SHARED | MAP_ANONYMOUS, -1, 0);
    if (mem == MAP_FAILED) return absl::InternalError("cannot map the feedback area");
    area_ = static_cast<FeedbackArea*>(mem);
    return absl::OkStatus();
  }

 protected:
  FeedbackReport Run(const Program& p) override {
    FeedbackCollector collector(area_);
    collector.Reset(true);
    auto start = std::chrono::steady_clock::now();
    pid_t pid = fork();
    if (pid == 0) RunChild(p, collector);

    ExitRecord& x = area_->exit;
    bool timed_out = false;
    int status = 0;
    if (pid < 0) {
      x.exit = static_cast<uint32_t>(ExitKind::kFault);
      x.has_fault = 1;
      x.fault_kind = static_cast<uint32_t>(FaultKind::kAbort);
    } else {
      auto limit = std::chrono::milliseconds(cfg_.timeout_ms);
      long nap_ns = 20'000;
      while (true) {
        pid_t r = waitpid(pid, &status, WNOHANG);
        if (r == pid) break;
        if (std::chrono::steady_clock::now() - start > limit) {
          kill(pid, SIGKILL);
          waitpid(pid, &status, 0);
          timed_out = true;
          break;
        }
        timespec ts{0, nap_ns};
        nanosleep(&ts, nullptr);
        nap_ns = std::min(nap_ns * 2, 1'000'000L);
      }
    }
    auto elapsed = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::steady_clock::now() - start);
    x.virtual_time = static_cast<uint64_t>(elapsed.count());
    if (pid >= 0) Classify(x, timed_out, status);
    return Harvest(*area_, nullptr, function_names_);
  }

 private:
  [[noreturn]] void RunChild(const Program& p, FeedbackCollector& collector) {
    g_child_area = area_;
    InstallChildHandlers();
    if (chdir(sandbox_dir().c_str()) != 0) _exit(126);
    // Target diagnostics (allocator aborts and the like) stay out of the
    // parent's output.
    int null_fd = open("/dev/null", O_WRONLY);
    if (null_fd >= 0) {
      dup2(null_fd, STDERR_FILENO);
      close(null_fd);
    }
    MappedMemory memory(cfg_.canary_page_bytes, cfg_.memory_limit_bytes);
    collector.set_resource_listener(&memory);
    ScopedHookSink sink(&collector);
    FfiInvoker invoker(entries_);
    Interpreter interp(manifest_, cfg_, files_dir(), memory, collector, invoker);
    try {
      interp.Run(p);
    } catch (const std::bad_alloc&) {
      area_->exit.exit = static_cast<uint32_t>(ExitKind::kOom);
      area_->exit.has_fault = 1;
      area_->exit.fault_kind = static_cast<uint32_t>(FaultKind::kOom);
    }
    area_->exit.finished = 1;
    _exit(0);
  }

  void Classify(ExitRecord& x, bool timed_out, int status) {
    auto fault = [&](FaultKind kind, uint64_t address) {
      x.has_fault = 1;
      x.fault_kind = static_cast<uint32_t>(kind);
      x.address = address;
      uint64_t offset = x.pc;
      Dl_info info{};
      if (x.pc != 0 && dladdr(reinterpret_cast<void*>(x.pc), &info) != 0 && info.dli_fbase) {
        offset = x.pc - reinterpret_cast<uint64_t>(info.dli_fbase);
      }
      x.crash_site = MakeCrashSite(function_names_[x.function_index],
                                   static_cast<uint32_t>(offset));
      ExitKind exit = ExitKind::kFault;
      if (kind == FaultKind::kTimeout) exit = ExitKind::kTimeout;
      if (kind == FaultKind::kOom) exit = ExitKind::kOom;
      x.exit = static_cast<uint32_t>(exit);
    };
    if (timed_out) {
      fault(FaultKind::kTimeout, 0);
      return;
    }
    if (x.finished) return;
    if (x.signal == SIGSEGV || x.signal == SIGBUS) {
      fault(ClassifyAddress(x.address, cfg_.near_null, GuardRanges(*area_)), x.address);
    } else {
      // Aborts, other signals, and targets that exit on their own.
      (void)status;
      fault(FaultKind::kAbort, x.address);
    }
  }

  void* handle_ = nullptr;
  FeedbackArea* area_ = nullptr;
  std::vector<Entry> entries_;
};

}  // namespace

absl::StatusOr<std::unique_ptr<Executor>> MakeFfiExecutor(const Manifest& m,
                                                          const std::string& library_path,
                                                          ExecConfig cfg) {
  auto ex = std::make_unique<FfiExecutor>(m, std::move(cfg));
  if (auto st = ex->Init(library_path); !st.ok()) return st;
  return std::unique_ptr<Executor>(std::move(ex));
}

}  // namespace apifuzz

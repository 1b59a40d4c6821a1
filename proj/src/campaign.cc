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


#include "apifuzz/campaign.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "apifuzz/dsl.h"
#include "apifuzz/synthetic_targets.h"
#include "json.hpp"

namespace apifuzz {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

double NowSeconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string IdStem(uint64_t id) { return absl::StrFormat("%06d", id); }

absl::Status WriteFile(const fs::path& path, std::string_view text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return absl::InternalError(absl::StrCat("cannot write ", tmp.string()));
    out << text;
    if (!out) return absl::InternalError(absl::StrCat("cannot write ", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) return absl::InternalError(absl::StrCat("cannot rename ", tmp.string(), ": ", ec.message()));
  return absl::OkStatus();
}

absl::StatusOr<std::string> ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Files in `dir` with extension `ext`, ordered by name.
std::vector<fs::path> ListFiles(const fs::path& dir, std::string_view ext) {
  std::vector<fs::path> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > ext.size() &&
        name.compare(name.size() - ext.size(), ext.size(), ext) == 0) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<uint64_t> StemId(const fs::path& path) {
  std::string stem = path.filename().string();
  stem = stem.substr(0, stem.find('.'));
  if (stem.empty() || !std::all_of(stem.begin(), stem.end(), ::isdigit)) return std::nullopt;
  return std::stoull(stem);
}

}  // namespace

absl::Status CampaignConfig::Check() const {
  if (manifest_path.empty()) return absl::InvalidArgumentError("no manifest");
  if (out_dir.empty()) return absl::InvalidArgumentError("no output directory");
  if ((execs == 0) == (seconds == 0)) {
    return absl::InvalidArgumentError("exactly one positive budget (execs or seconds) is required");
  }
  if (pilot_fraction < 0 || pilot_fraction > 1) {
    return absl::InvalidArgumentError("pilot fraction must be within [0, 1]");
  }
  return gen.Check();
}

std::string RunSummary::ToJson() const {
  ordered_json j;
  j["schema"] = kSummarySchema;
  j["execs"] = execs;
  j["seeds"] = seeds;
  j["unique-crashes"] = unique_crashes;
  j["spurious-filtered"] = spurious_filtered;
  j["constraints-learned"] = constraints_learned;
  j["coverage-count"] = coverage_count;
  return j.dump(2) + "\n";
}

absl::StatusOr<RunSummary> RunSummary::FromJson(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return absl::InvalidArgumentError("summary is not a JSON object");
  if (j.value("schema", 0) != kSummarySchema) {
    return absl::InvalidArgumentError(absl::StrCat("unsupported summary schema ", j.value("schema", 0)));
  }
  RunSummary s;
  s.execs = j.value("execs", uint64_t{0});
  s.seeds = j.value("seeds", uint64_t{0});
  s.unique_crashes = j.value("unique-crashes", uint64_t{0});
  s.spurious_filtered = j.value("spurious-filtered", uint64_t{0});
  s.constraints_learned = j.value("constraints-learned", uint64_t{0});
  s.coverage_count = j.value("coverage-count", uint64_t{0});
  return s;
}

absl::StatusOr<std::unique_ptr<Executor>> MakeExecutor(const Manifest& m, BackendKind backend,
                                                       const std::string& library_path,
                                                       ExecConfig cfg) {
  if (backend == BackendKind::kFfi) return MakeFfiExecutor(m, library_path, std::move(cfg));
  const SyntheticLibrary* lib = FindSyntheticLibrary(m.library());
  if (lib == nullptr) {
    return absl::NotFoundError(absl::StrCat("no synthetic target named \"", m.library(), "\""));
  }
  return MakeSyntheticExecutor(m, *lib, std::move(cfg));
}

std::string ReportToJson(const FeedbackReport& r, const Manifest& m) {
  (void)m;
  ordered_json j;
  j["exit"] = std::string(ExitKindName(r.exit));
  j["exit-stmt"] = r.exit_stmt;
  if (r.fault) {
    j["fault"] = {{"kind", std::string(FaultKindName(r.fault->kind))},
                  {"address", r.fault->address},
                  {"crash-site", r.fault->crash_site},
                  {"function", r.fault->function},
                  {"stmt", r.fault->stmt}};
  }
  j["coverage"] = r.CoverageKeys();
  auto calls = ordered_json::array();
  for (const auto& c : r.calls) {
    calls.push_back({{"stmt", c.stmt}, {"function", c.function}, {"returned", c.returned}, {"ret", c.ret}});
  }
  j["calls"] = calls;
  j["virtual-time"] = r.virtual_time;
  return j.dump(2) + "\n";
}

std::string DescribeReport(const FeedbackReport& r) {
  std::string out = absl::StrCat("exit: ", std::string(ExitKindName(r.exit)));
  if (r.exit != ExitKind::kOk) absl::StrAppend(&out, " at <", r.exit_stmt, ">");
  absl::StrAppend(&out, "\n");
  if (r.fault) {
    absl::StrAppend(&out, absl::StrFormat("fault: %s at 0x%x in %s (site %d, stmt <%d>)\n",
                                          std::string(FaultKindName(r.fault->kind)), r.fault->address,
                                          r.fault->function, r.fault->crash_site & 0xffffffffu,
                                          r.fault->stmt));
  }
  absl::StrAppend(&out, "coverage: ", r.coverage.size(), " keys\n");
  for (const auto& c : r.calls) {
    absl::StrAppend(&out, "call <", c.stmt, "> ", c.function);
    if (c.returned) {
      absl::StrAppend(&out, absl::StrFormat(" = 0x%x", c.ret));
    } else {
      absl::StrAppend(&out, " did not return");
    }
    absl::StrAppend(&out, "\n");
  }
  absl::StrAppend(&out, "virtual time: ", r.virtual_time, "\n");
  return out;
}

absl::StatusOr<std::vector<StoredCrash>> ListCrashes(const std::string& out_dir) {
  std::vector<StoredCrash> out;
  for (const auto& path : ListFiles(fs::path(out_dir) / "crashes", ".report.json")) {
    auto text = ReadFile(path);
    if (!text.ok()) return text.status();
    auto j = nlohmann::json::parse(*text, nullptr, false);
    if (j.is_discarded()) return absl::InvalidArgumentError(absl::StrCat("bad report ", path.string()));
    StoredCrash c;
    std::string name = path.filename().string();
    c.stem = name.substr(0, name.size() - std::string_view(".report.json").size());
    auto prog = ReadFile(path.parent_path() / (c.stem + ".hdsl"));
    if (!prog.ok()) return prog.status();
    c.program_text = *prog;
    c.exit = j.value("exit", "");
    if (j.contains("fault")) {
      c.key.crash_site = j["fault"].value("crash-site", uint64_t{0});
      c.key.function = j["fault"].value("function", "");
      c.fault = j["fault"].value("kind", "");
    }
    out.push_back(std::move(c));
  }
  return out;
}

Campaign::Campaign(CampaignConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {}

Campaign::~Campaign() {
  if (lock_fd_ >= 0) {
    std::error_code ec;
    fs::remove(fs::path(cfg_.out_dir) / ".lock", ec);
    close(lock_fd_);
  }
}

absl::StatusOr<std::unique_ptr<Campaign>> Campaign::Open(CampaignConfig cfg) {
  if (auto st = cfg.Check(); !st.ok()) return st;
  std::unique_ptr<Campaign> c(new Campaign(std::move(cfg)));
  if (auto st = c->Init(); !st.ok()) return st;
  return c;
}

absl::Status Campaign::Init() {
  fs::path out(cfg_.out_dir);
  std::error_code ec;
  fs::create_directories(out / "corpus", ec);
  fs::create_directories(out / "crashes", ec);
  if (ec) return absl::InternalError(absl::StrCat("cannot create ", out.string(), ": ", ec.message()));
  std::string lock = (out / ".lock").string();
  lock_fd_ = open(lock.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (lock_fd_ < 0) return absl::InternalError(absl::StrCat("cannot open ", lock));
  if (flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    close(lock_fd_);
    lock_fd_ = -1;
    return absl::FailedPreconditionError(absl::StrCat("another campaign holds ", lock));
  }

  auto m = LoadManifest(cfg_.manifest_path);
  if (!m.ok()) return m.status();
  manifest_ = *std::move(m);
  if (manifest_.functions().empty()) return absl::InvalidArgumentError("manifest has no functions");

  ExecConfig ec_cfg = cfg_.exec;
  ec_cfg.sandbox_dir = (out / "sandbox").string();
  ec_cfg.rng_seed = cfg_.seed;
  std::string lib = cfg_.library_path;
  if (cfg_.backend == BackendKind::kFfi && lib.empty()) {
    lib = (fs::path(cfg_.manifest_path).parent_path() / absl::StrCat("lib", manifest_.library(), ".so")).string();
  }
  auto exec = MakeExecutor(manifest_, cfg_.backend, lib, ec_cfg);
  if (!exec.ok()) return exec.status();
  exec_ = *std::move(exec);

  gen_ = std::make_unique<Generator>(manifest_, cfg_.gen);
  relations_ = InferStaticRelations(manifest_);
  gen_->set_relations(&relations_);
  gen_->set_arg_cache(&arg_cache_);

  if (auto text = ReadFile(out / "constraints.jsonl"); text.ok()) {
    auto store = ConstraintStore::FromJsonLines(*text);
    if (!store.ok()) return store.status();
    store_ = *std::move(store);
  }
  if (auto text = ReadFile(out / "summary.json"); text.ok()) {
    auto prior = RunSummary::FromJson(*text);
    if (!prior.ok()) return prior.status();
    prior_execs_ = prior->execs;
    spurious_ = prior->spurious_filtered;
  }
  {
    ordered_json run;
    run["manifest"] = fs::absolute(cfg_.manifest_path, ec).string();
    run["backend"] = cfg_.backend == BackendKind::kFfi ? "ffi" : "synthetic";
    run["library"] = lib;
    run["seed"] = cfg_.seed;
    if (auto st = WriteFile(out / "run.json", run.dump(2) + "\n"); !st.ok()) return st;
  }
  if (auto st = Ingest(); !st.ok()) return st;
  triaged_version_ = store_.version();
  start_seconds_ = NowSeconds();
  return absl::OkStatus();
}

absl::Status Campaign::Ingest() {
  fs::path out(cfg_.out_dir);
  uint64_t before = exec_->execs();
  for (const auto& path : ListFiles(out / "corpus", ".hdsl")) {
    auto id = StemId(path);
    auto text = ReadFile(path);
    if (!id || !text.ok()) continue;
    next_id_ = std::max(next_id_, *id + 1);
    auto p = ParseProgram(*text, manifest_.types());
    if (!p.ok()) continue;
    p->Normalize();
    if (!ValidateProgram(*p, manifest_).empty()) continue;
    auto r = exec_->Execute(*p);
    if (r.IsCrash()) continue;
    std::vector<uint32_t> fresh;
    for (uint32_t k : r.CoverageKeys()) {
      if (coverage_.insert(k).second) fresh.push_back(k);
    }
    AddSeed(*id, *std::move(p), std::move(fresh), r);
  }
  for (const auto& path : ListFiles(out / "crashes", ".hdsl")) {
    auto id = StemId(path);
    auto text = ReadFile(path);
    if (!id || !text.ok()) continue;
    next_id_ = std::max(next_id_, *id + 1);
    auto p = ParseProgram(*text, manifest_.types());
    if (!p.ok()) continue;
    p->Normalize();
    if (!ValidateProgram(*p, manifest_).empty()) continue;
    auto r = exec_->Execute(*p);
    if (!r.IsCrash() || !r.fault) continue;
    CrashKey key{r.fault->crash_site, r.fault->function};
    if (crashes_.count(key)) continue;
    crashes_[key] = CrashRecord{*id, key, *std::move(p), std::move(r)};
  }
  overhead_execs_ += exec_->execs() - before;
  return absl::OkStatus();
}

uint64_t Campaign::execs() const { return exec_->execs() - overhead_execs_; }

uint64_t Campaign::Remaining() const {
  if (cfg_.execs == 0) return UINT64_MAX;
  return cfg_.execs > execs() ? cfg_.execs - execs() : 0;
}

bool Campaign::BudgetLeft() const {
  if (cfg_.execs > 0) return execs() < cfg_.execs;
  return NowSeconds() - start_seconds_ < static_cast<double>(cfg_.seconds);
}

void Campaign::NoteCmp(const FeedbackReport& r) {
  for (const auto& c : r.cmp_log) {
    for (uint64_t v : {c.a, c.b}) {
      if (cmp_literals_.size() >= cfg_.max_cmp_literals) return;
      if (cmp_seen_.insert(v).second) cmp_literals_.push_back(v);
    }
  }
}

void Campaign::AddSeed(uint64_t id, Program p, std::vector<uint32_t> fresh, const FeedbackReport& r) {
  if (auto target = p.TargetPosition()) {
    const FuncSig* sig = manifest_.FindFunction(p[*target].call().name);
    for (size_t i = 0; sig != nullptr && i < sig->params.size(); ++i) {
      arg_cache_.Add(p, *target, i, manifest_);
    }
  }
  size_t n = p.size();
  pool_.Add(SeedEntry{id, std::move(p), std::move(fresh), 0, r.virtual_time, n});
}

void Campaign::ForgetCrash(const CrashKey& key) {
  auto it = crashes_.find(key);
  if (it == crashes_.end()) return;
  fs::path dir = fs::path(cfg_.out_dir) / "crashes";
  std::error_code ec;
  fs::remove(dir / (IdStem(it->second.id) + ".hdsl"), ec);
  fs::remove(dir / (IdStem(it->second.id) + ".report.json"), ec);
  crashes_.erase(it);
}

Outcome Campaign::Process(const Program& p, const std::vector<size_t>& inserted) {
  if (!BudgetLeft()) return Outcome::kSkipped;
  if (!ValidateProgram(p, manifest_).empty()) return Outcome::kSkipped;
  uint64_t id = NextId();
  FeedbackReport r = exec_->Execute(p);
  NoteCmp(r);
  InferFromPath(p, r, manifest_, store_, id);
  Outcome outcome = Outcome::kNoGain;
  if (r.IsCrash()) {
    InferConfig ic = cfg_.infer;
    ic.max_reexecs = static_cast<uint32_t>(std::min<uint64_t>(ic.max_reexecs, Remaining()));
    CrashVerdict v = InferFromCrash(p, r, *exec_, store_, rng_, id, ic);
    if (v.kind == CrashVerdict::Kind::kSpurious) {
      ++spurious_;
      outcome = Outcome::kSpuriousCrash;
    } else {
      CrashKey key;
      if (r.fault) key = CrashKey{r.fault->crash_site, r.fault->function};
      if (crashes_.count(key)) {
        outcome = Outcome::kDuplicateCrash;
      } else {
        fs::path dir = fs::path(cfg_.out_dir) / "crashes";
        (void)WriteFile(dir / (IdStem(id) + ".hdsl"), SerializeProgram(p, manifest_.types()));
        (void)WriteFile(dir / (IdStem(id) + ".report.json"), ReportToJson(r, manifest_));
        crashes_[key] = CrashRecord{id, key, p, r};
        outcome = Outcome::kNewCrash;
      }
    }
  } else if (r.NormalExit()) {
    std::vector<uint32_t> keys = r.CoverageKeys();
    std::vector<uint32_t> fresh;
    for (uint32_t k : keys) {
      if (!coverage_.count(k)) fresh.push_back(k);
    }
    if (!fresh.empty()) {
      Program seed = p;
      if (!inserted.empty() && Remaining() > inserted.size()) {
        EffectiveResult eff = LearnEffectiveRelation(p, inserted, keys, *exec_, id);
        for (auto& e : eff.kept) relations_.AddEffective(std::move(e));
        seed = std::move(eff.program);
      }
      seed = MinimizeNewSeed(seed, keys, *exec_, nullptr,
                             std::min<uint64_t>(cfg_.max_seed_minimize_execs, Remaining()));
      coverage_.insert(fresh.begin(), fresh.end());
      (void)WriteFile(fs::path(cfg_.out_dir) / "corpus" / (IdStem(id) + ".hdsl"),
                      SerializeProgram(seed, manifest_.types()));
      AddSeed(id, std::move(seed), std::move(fresh), r);
      gen_->set_cmp_literals(cmp_literals_);
      outcome = Outcome::kNewSeed;
    }
  }
  if (store_.version() != triaged_version_) Retriage();
  return outcome;
}

void Campaign::Retriage() {
  triaged_version_ = store_.version();
  uint64_t before = exec_->execs();
  std::vector<CrashKey> drop;
  for (const auto& [key, rec] : crashes_) {
    auto refined = Refine(rec.program, store_, manifest_, rng_, gen_.get(), cfg_.infer.pad_length);
    if (!refined.ok() || *refined == rec.program) continue;
    if (!exec_->Execute(*refined).IsCrash()) drop.push_back(key);
  }
  overhead_execs_ += exec_->execs() - before;
  for (const auto& key : drop) {
    ForgetCrash(key);
    ++spurious_;
  }
}

RunSummary Campaign::Summary() const {
  RunSummary s;
  s.execs = prior_execs_ + execs();
  s.seeds = pool_.size();
  s.unique_crashes = crashes_.size();
  s.spurious_filtered = spurious_;
  s.constraints_learned = store_.active().size();
  s.coverage_count = coverage_.size();
  return s;
}

absl::Status Campaign::Save() const {
  fs::path out(cfg_.out_dir);
  if (auto st = WriteFile(out / "constraints.jsonl", store_.ToJsonLines()); !st.ok()) return st;
  return WriteFile(out / "summary.json", Summary().ToJson());
}

absl::StatusOr<RunSummary> Campaign::Run() {
  const auto& fns = manifest_.functions();
  size_t cursor = 0;
  bool swept = false;
  uint64_t idle = 0;
  while (BudgetLeft()) {
    double spent = cfg_.execs > 0 ? static_cast<double>(execs()) / static_cast<double>(cfg_.execs)
                                  : (NowSeconds() - start_seconds_) / static_cast<double>(cfg_.seconds);
    bool pilot = !swept || spent < cfg_.pilot_fraction || pool_.empty();
    uint64_t before = exec_->execs();
    if (pilot) {
      const FuncSig& sig = fns[cursor];
      if (++cursor == fns.size()) {
        cursor = 0;
        swept = true;
      }
      auto p = gen_->PilotRound(sig, rng_);
      if (p.ok()) {
        auto refined = Refine(*p, store_, manifest_, rng_, gen_.get(), cfg_.infer.pad_length);
        if (refined.ok()) Process(*refined);
      }
    } else {
      auto c = gen_->EvolveRound(pool_, &store_, rng_);
      pool_.Tick();
      if (c.ok()) Process(c->program, c->inserted_calls);
    }
    idle = exec_->execs() == before ? idle + 1 : 0;
    if (idle > 100000) {
      (void)Save();
      return absl::FailedPreconditionError("no program for this manifest could be executed");
    }
  }
  Retriage();
  if (auto st = Save(); !st.ok()) return st;
  return Summary();
}

}  // namespace apifuzz

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


#include "apifuzz/cli.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "apifuzz/campaign.h"
#include "apifuzz/constraints.h"
#include "apifuzz/dsl.h"
#include "json.hpp"

namespace apifuzz {
namespace {

namespace fs = std::filesystem;

std::optional<std::string> Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunInfo {
  std::string manifest;
  BackendKind backend = BackendKind::kSynthetic;
  std::string library;
};

std::optional<RunInfo> ReadRunInfo(const fs::path& out_dir) {
  auto text = Slurp(out_dir / "run.json");
  if (!text) return std::nullopt;
  auto j = nlohmann::json::parse(*text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  RunInfo info;
  info.manifest = j.value("manifest", "");
  info.backend = j.value("backend", "") == "ffi" ? BackendKind::kFfi : BackendKind::kSynthetic;
  info.library = j.value("library", "");
  return info;
}

absl::StatusOr<Program> LoadProgram(const std::string& path, const Manifest& m) {
  auto text = Slurp(path);
  if (!text) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  auto p = ParseProgram(*text, m.types());
  if (!p.ok()) return p.status();
  auto diags = ValidateProgram(*p, m);
  if (!diags.empty()) return absl::InvalidArgumentError(FormatDiagnostics(diags));
  p->Normalize();
  return p;
}

struct FuzzArgs {
  std::string manifest;
  std::string out;
  int64_t execs = -1;
  int64_t seconds = -1;
  uint64_t seed = 0;
  std::string backend = "synthetic";
  std::string library;
  int zero_findings_exit = kExitNoFindings;
};

int Fuzz(const FuzzArgs& a, std::ostream& out, std::ostream& err) {
  if ((a.execs >= 0) == (a.seconds >= 0)) {
    err << "fuzz: give exactly one of --execs and --seconds\n";
    return kExitUsage;
  }
  if (a.execs == 0 || a.seconds == 0) {
    err << "fuzz: the budget must be positive\n";
    return kExitUsage;
  }
  CampaignConfig cfg;
  cfg.manifest_path = a.manifest;
  cfg.out_dir = a.out;
  cfg.execs = a.execs > 0 ? static_cast<uint64_t>(a.execs) : 0;
  cfg.seconds = a.seconds > 0 ? static_cast<uint64_t>(a.seconds) : 0;
  cfg.seed = a.seed;
  cfg.backend = a.backend == "ffi" ? BackendKind::kFfi : BackendKind::kSynthetic;
  cfg.library_path = a.library;
  auto campaign = Campaign::Open(cfg);
  if (!campaign.ok()) {
    err << "fuzz: " << campaign.status().message() << "\n";
    return kExitTargetError;
  }
  auto summary = (*campaign)->Run();
  if (!summary.ok()) {
    err << "fuzz: " << summary.status().message() << "\n";
    return kExitTargetError;
  }
  out << summary->ToJson();
  return summary->unique_crashes == 0 ? a.zero_findings_exit : kExitOk;
}

int Replay(const std::string& file, std::string manifest_path, std::ostream& out, std::ostream& err) {
  RunInfo info;
  if (manifest_path.empty()) {
    auto found = ReadRunInfo(fs::path(file).parent_path().parent_path());
    if (!found || found->manifest.empty()) {
      err << "replay: no --manifest given and no run.json next to " << file << "\n";
      return kExitUsage;
    }
    info = *found;
  } else {
    info.manifest = manifest_path;
  }
  auto m = LoadManifest(info.manifest);
  if (!m.ok()) {
    err << "replay: " << m.status().message() << "\n";
    return kExitTargetError;
  }
  auto p = LoadProgram(file, *m);
  if (!p.ok()) {
    err << "replay: " << file << ": " << p.status().message() << "\n";
    return kExitTargetError;
  }
  auto exec = MakeExecutor(*m, info.backend, info.library, ExecConfig{});
  if (!exec.ok()) {
    err << "replay: " << exec.status().message() << "\n";
    return kExitTargetError;
  }
  out << DescribeReport((*exec)->Execute(*p));
  return kExitOk;
}

int Triage(const std::string& out_dir, std::ostream& out, std::ostream& err) {
  auto crashes = ListCrashes(out_dir);
  if (!crashes.ok()) {
    err << "triage: " << crashes.status().message() << "\n";
    return kExitTargetError;
  }
  std::map<CrashKey, std::vector<const StoredCrash*>> groups;
  for (const auto& c : *crashes) groups[c.key].push_back(&c);
  std::optional<Manifest> m;
  ConstraintStore store;
  if (!groups.empty()) {
    auto info = ReadRunInfo(out_dir);
    if (!info) {
      err << "triage: no run.json in " << out_dir << "\n";
      return kExitTargetError;
    }
    auto loaded = LoadManifest(info->manifest);
    if (!loaded.ok()) {
      err << "triage: " << loaded.status().message() << "\n";
      return kExitTargetError;
    }
    m = *std::move(loaded);
    if (auto text = Slurp(fs::path(out_dir) / "constraints.jsonl")) {
      auto s = ConstraintStore::FromJsonLines(*text);
      if (s.ok()) store = *std::move(s);
    }
  }
  fs::path dir = fs::path(out_dir) / "triage";
  std::error_code ec;
  if (!groups.empty()) fs::create_directories(dir, ec);
  out << absl::StrFormat("%-6s %-28s %-6s %-6s %-14s %-9s %s\n", "group", "function", "site", "count",
                         "fault", "spurious", "repro");
  size_t g = 0;
  for (const auto& [key, members] : groups) {
    bool spurious = false;
    std::string repro = "-";
    for (const StoredCrash* c : members) {
      auto p = ParseProgram(c->program_text, m->types());
      if (!p.ok()) continue;
      p->Normalize();
      if (!ValidateProgram(*p, *m).empty()) continue;
      spurious = spurious || !SatisfiesConstraints(*p, store, *m);
      if (repro == "-") {
        auto code = TranslateToC(*p, *m);
        if (code.ok()) {
          fs::path file = dir / absl::StrFormat("group-%03d.c", g);
          std::ofstream(file) << *code;
          repro = file.string();
        }
      }
    }
    out << absl::StrFormat("%-6d %-28s %-6d %-6d %-14s %-9s %s\n", g, key.function,
                           key.crash_site & 0xffffffffu, members.size(), members.front()->fault,
                           spurious ? "yes" : "no", repro);
    ++g;
  }
  return kExitOk;
}

int Translate(const std::string& file, const std::string& manifest_path, std::ostream& out,
              std::ostream& err) {
  auto m = LoadManifest(manifest_path);
  if (!m.ok()) {
    err << "translate: " << m.status().message() << "\n";
    return kExitTargetError;
  }
  auto p = LoadProgram(file, *m);
  if (!p.ok()) {
    err << "translate: " << file << ": " << p.status().message() << "\n";
    return kExitTargetError;
  }
  auto code = TranslateToC(*p, *m);
  if (!code.ok()) {
    err << "translate: " << code.status().message() << "\n";
    return kExitTargetError;
  }
  out << *code;
  return kExitOk;
}

int Stats(const std::string& out_dir, std::ostream& out, std::ostream& err) {
  auto text = Slurp(fs::path(out_dir) / "summary.json");
  if (!text) {
    err << "stats: no summary.json in " << out_dir << "\n";
    return kExitTargetError;
  }
  auto summary = RunSummary::FromJson(*text);
  if (!summary.ok()) {
    err << "stats: " << summary.status().message() << "\n";
    return kExitTargetError;
  }
  out << absl::StrFormat("execs               %d\n", summary->execs);
  out << absl::StrFormat("seeds               %d\n", summary->seeds);
  out << absl::StrFormat("unique crashes      %d\n", summary->unique_crashes);
  out << absl::StrFormat("spurious filtered   %d\n", summary->spurious_filtered);
  out << absl::StrFormat("constraints learned %d\n", summary->constraints_learned);
  out << absl::StrFormat("coverage            %d\n", summary->coverage_count);
  if (auto lines = Slurp(fs::path(out_dir) / "constraints.jsonl")) {
    auto store = ConstraintStore::FromJsonLines(*lines);
    if (store.ok()) {
      for (const auto& c : store->active()) out << "  " << DescribeConstraint(c) << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Library API fuzzer", "apifuzz"};
  app.require_subcommand(1);

  FuzzArgs fuzz;
  auto* fuzz_cmd = app.add_subcommand("fuzz", "Run a fuzzing campaign");
  fuzz_cmd->add_option("--manifest", fuzz.manifest, "Target manifest")->required();
  fuzz_cmd->add_option("--out", fuzz.out, "Output directory")->required();
  auto* execs = fuzz_cmd->add_option("--execs", fuzz.execs, "Execution budget");
  fuzz_cmd->add_option("--seconds", fuzz.seconds, "Time budget")->excludes(execs);
  fuzz_cmd->add_option("--seed", fuzz.seed, "Random seed")->required();
  fuzz_cmd->add_option("--backend", fuzz.backend, "Target backend")
      ->check(CLI::IsMember({"synthetic", "ffi"}));
  fuzz_cmd->add_option("--library", fuzz.library, "Shared library for the ffi backend");
  fuzz_cmd->add_option("--zero-findings-exit", fuzz.zero_findings_exit,
                       "Exit status when no crash was found");

  std::string replay_file, replay_manifest;
  auto* replay_cmd = app.add_subcommand("replay", "Run one program and print its report");
  replay_cmd->add_option("file", replay_file, "Program file")->required();
  replay_cmd->add_option("--manifest", replay_manifest, "Target manifest");

  std::string triage_out;
  auto* triage_cmd = app.add_subcommand("triage", "Group stored crashes");
  triage_cmd->add_option("--out", triage_out, "Campaign directory")->required();

  std::string translate_file, translate_manifest;
  auto* translate_cmd = app.add_subcommand("translate", "Print a program as C");
  translate_cmd->add_option("file", translate_file, "Program file")->required();
  translate_cmd->add_option("--manifest", translate_manifest, "Target manifest")->required();

  std::string stats_out;
  auto* stats_cmd = app.add_subcommand("stats", "Print campaign statistics");
  stats_cmd->add_option("--out", stats_out, "Campaign directory")->required();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }

  if (*fuzz_cmd) return Fuzz(fuzz, out, err);
  if (*replay_cmd) return Replay(replay_file, replay_manifest, out, err);
  if (*triage_cmd) return Triage(triage_out, out, err);
  if (*translate_cmd) return Translate(translate_file, translate_manifest, out, err);
  if (*stats_cmd) return Stats(stats_out, out, err);
  return kExitUsage;
}

}  // namespace apifuzz

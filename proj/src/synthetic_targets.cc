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


#include "apifuzz/synthetic_targets.h"

#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace apifuzz {

using nlohmann::json;

namespace {

absl::StatusOr<FaultKind> ParseFaultKind(std::string_view name) {
  for (auto k : {FaultKind::kNullDeref, FaultKind::kCanaryHit, FaultKind::kInvalidAccess,
                 FaultKind::kTimeout, FaultKind::kOom, FaultKind::kAbort}) {
    if (FaultKindName(k) == name) return k;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown fault kind '", std::string(name), "'"));
}

absl::StatusOr<std::vector<std::pair<std::string, std::string>>> ParsePairs(const json& j) {
  std::vector<std::pair<std::string, std::string>> out;
  if (j.is_null()) return out;
  if (!j.is_array()) return absl::InvalidArgumentError("relations must be arrays of pairs");
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
      return absl::InvalidArgumentError("relation entries are [from, to] name pairs");
    }
    out.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
  }
  return out;
}

}  // namespace

absl::StatusOr<Fixture> LoadFixture(const std::string& fixtures_dir, std::string_view name) {
  const CatalogEntry* entry = nullptr;
  for (const auto& e : FixtureCatalog()) {
    if (e.name == name) entry = &e;
  }
  if (entry == nullptr) {
    return absl::NotFoundError(absl::StrCat("no fixture named '", std::string(name), "'"));
  }
  std::string dir = absl::StrCat(fixtures_dir, "/", std::string(name));
  Fixture fx;
  fx.name = entry->name;
  fx.library = entry->library;
  fx.single_constraint = entry->single_constraint;
  auto manifest = LoadManifest(dir + "/manifest.json");
  if (!manifest.ok()) return manifest.status();
  fx.manifest = *std::move(manifest);

  std::ifstream in(dir + "/ground_truth.json");
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", dir, "/ground_truth.json"));
  std::stringstream ss;
  ss << in.rdbuf();
  json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return absl::InvalidArgumentError(absl::StrCat(dir, "/ground_truth.json is not a JSON object"));
  }
  auto member = [&j](const char* key, json fallback) {
    return j.contains(key) ? j.at(key) : fallback;
  };
  for (const auto& c : member("constraints", json::array())) {
    auto parsed = ConstraintFromJson(c.dump());
    if (!parsed.ok()) return parsed.status();
    if (fx.manifest.FindFunction(parsed->first.function) == nullptr) {
      return absl::InvalidArgumentError(
          absl::StrCat("ground truth names unknown function '", parsed->first.function, "'"));
    }
    fx.ground_truth.push_back(parsed->first);
  }
  for (const auto& b : member("bugs", json::array())) {
    SeededBug bug;
    bug.function = b.value("function", "");
    bug.description = b.value("description", "");
    bug.program = b.value("program", "");
    auto kind = ParseFaultKind(b.value("fault", ""));
    if (!kind.ok()) return kind.status();
    bug.fault = *kind;
    fx.bugs.push_back(std::move(bug));
  }
  json rel = member("relations", json::object());
  auto eff = ParsePairs(rel.contains("effective") ? rel.at("effective") : json());
  if (!eff.ok()) return eff.status();
  fx.effective_relations = *eff;
  auto neutral = ParsePairs(rel.contains("neutral") ? rel.at("neutral") : json());
  if (!neutral.ok()) return neutral.status();
  fx.neutral_relations = *neutral;
  json sites_by_fn = member("sites", json::object());
  for (const auto& [fn, sites] : sites_by_fn.items()) {
    if (!sites.is_array()) return absl::InvalidArgumentError("sites must map names to arrays");
    fx.branch_sites[fn] = sites.get<std::vector<uint32_t>>();
  }
  return fx;
}

absl::StatusOr<std::vector<Fixture>> LoadAllFixtures(const std::string& fixtures_dir) {
  std::vector<Fixture> out;
  for (const auto& e : FixtureCatalog()) {
    auto fx = LoadFixture(fixtures_dir, e.name);
    if (!fx.ok()) return fx.status();
    out.push_back(*std::move(fx));
  }
  return out;
}

}  // namespace apifuzz

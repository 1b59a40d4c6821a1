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


// In-process fixture libraries with declared ground truth.
//
// Each fixture is a SyntheticLibrary compiled into the binary plus a
// directory `<fixtures>/<name>/` holding manifest.json and
// ground_truth.json. Branch sites are numbered literally in the fixture
// code and declared per function in the ground truth.

#ifndef APIFUZZ_SYNTHETIC_TARGETS_H_
#define APIFUZZ_SYNTHETIC_TARGETS_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "apifuzz/backend.h"
#include "apifuzz/constraints.h"
#include "apifuzz/feedback.h"
#include "apifuzz/manifest.h"

namespace apifuzz {

struct SeededBug {
  std::string function;
  std::string description;
  FaultKind fault = FaultKind::kInvalidAccess;
  // DSL text of a minimal trigger.
  std::string program;
};

struct CatalogEntry {
  std::string name;
  const SyntheticLibrary* library = nullptr;
  // One of the fixtures that each carry exactly one constraint kind.
  bool single_constraint = false;
};

struct Fixture {
  std::string name;
  const SyntheticLibrary* library = nullptr;
  bool single_constraint = false;
  Manifest manifest;
  std::vector<Constraint> ground_truth;
  std::vector<SeededBug> bugs;
  // (inserted function, target function) pairs a deletion test must keep,
  // and ones it must drop.
  std::vector<std::pair<std::string, std::string>> effective_relations;
  std::vector<std::pair<std::string, std::string>> neutral_relations;
  std::map<std::string, std::vector<uint32_t>> branch_sites;
};

const std::vector<CatalogEntry>& FixtureCatalog();
const SyntheticLibrary* FindSyntheticLibrary(std::string_view name);

absl::StatusOr<Fixture> LoadFixture(const std::string& fixtures_dir, std::string_view name);
// Every fixture of the catalog, in catalog order.
absl::StatusOr<std::vector<Fixture>> LoadAllFixtures(const std::string& fixtures_dir);

}  // namespace apifuzz

#endif  // APIFUZZ_SYNTHETIC_TARGETS_H_

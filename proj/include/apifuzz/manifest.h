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

// Library description: the type graph and function table of a target.
//
// JSON schema:
//
//   {"library": str,
//    "types": [{"name": str,
//               "kind": "primitive|array|record|alias|pointer|opaque|funcptr|void",
//               // primitive: "width_bits", optional "signed", "float",
//               //            "variants" (enum values)
//               // array:     "element", optional "len" (absent = variable)
//               // record:    "fields": [{"name", "type", "offset"}],
//               //            optional "size"
//               // alias:     "of"
//               // pointer:   "pointee", optional "trivial"
//               // funcptr:   "params": [str], "ret"
//              }],
//    "functions": [{"name": str, "params": [{"name": str, "type": str}],
//                   "ret": str}]}
//
// Type fields may use derived spellings (`T*`, `Vec<T>`, `T[N]`).

#ifndef APIFUZZ_MANIFEST_H_
#define APIFUZZ_MANIFEST_H_

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"
#include "apifuzz/types.h"

namespace apifuzz {

class Manifest {
 public:
  Manifest() = default;

  const std::string& library() const { return library_; }
  const TypeRegistry& types() const { return types_; }
  const std::vector<FuncSig>& functions() const { return functions_; }

  const FuncSig* FindFunction(std::string_view name) const;
  std::optional<size_t> FunctionIndex(std::string_view name) const;

  // Functions whose return type matches `type`.
  const std::vector<size_t>& ProducersOf(TypeId type) const;
  // Functions that fill a `T*` through a `T**` parameter; pairs of
  // (function, parameter position).
  const std::vector<std::pair<size_t, size_t>>& OutParamProducersOf(TypeId type) const;

  // Builds a manifest from an already populated registry; used by tests and
  // by the JSON loader.
  static absl::StatusOr<Manifest> Build(std::string library, TypeRegistry types,
                                        std::vector<FuncSig> functions);

 private:
  std::string library_;
  TypeRegistry types_;
  std::vector<FuncSig> functions_;
  std::unordered_map<std::string, size_t> by_name_;
  std::unordered_map<TypeId, std::vector<size_t>> producers_;
  std::unordered_map<TypeId, std::vector<std::pair<size_t, size_t>>> out_producers_;
};

absl::StatusOr<Manifest> ParseManifest(std::string_view json_text);
absl::StatusOr<Manifest> LoadManifest(const std::string& path);

}  // namespace apifuzz

#endif  // APIFUZZ_MANIFEST_H_

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

// Text form of programs.
//
//   <0>  load Vec<char> = vec(32)["GXsAAAAAAAAAo9tsrXXoqw57jwAAAAAAAAARNk+1AAA="]
//   <1>  load char* = &<0>
//   <2>  load char** = null
//   <3>  load int = 0
//   <4>  call cJSON_ParseWithOpts (<1>, <2>, <3>)
//   <5>  assert non_null(<4>)
//   <7>  update <4>[0.child] = <6>
//   <13> call cJSON_PrintBuffered ? (<4>, <11>, <12>)
//
// One statement per line. `?` after a call name enables coverage tracking
// for that call; `target:` and `relative:` mark the call's role. `//`
// starts a comment. Arrays of more than 16 primitive elements serialize
// as a Base64 string of their memory image.

#ifndef APIFUZZ_DSL_H_
#define APIFUZZ_DSL_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "apifuzz/manifest.h"
#include "apifuzz/program.h"

namespace apifuzz {

inline constexpr size_t kBase64Threshold = 16;

absl::StatusOr<Program> ParseProgram(std::string_view text, const TypeRegistry& types);

std::string SerializeProgram(const Program& p, const TypeRegistry& types);
std::string SerializeValue(const Value& v, const TypeRegistry& types);
std::string SerializeStatement(const Statement& s, const TypeRegistry& types);

struct Diagnostic {
  StmtIndex index = 0;
  std::string message;
};

std::string FormatDiagnostics(const std::vector<Diagnostic>& diags);

// Type-checks a program against a manifest. Empty iff the program is valid.
std::vector<Diagnostic> ValidateProgram(const Program& p, const Manifest& m);

// Lowers a validated program to C-like source text.
absl::StatusOr<std::string> TranslateToC(const Program& p, const Manifest& m);

}  // namespace apifuzz

#endif  // APIFUZZ_DSL_H_

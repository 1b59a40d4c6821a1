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


// Command line front end.
//
//   fuzz --manifest <path> --out <dir> --execs N | --seconds N --seed N
//        [--backend synthetic|ffi]
//   replay <file> [--manifest <path>]
//   triage --out <dir>
//   translate <file> --manifest <path>
//   stats --out <dir>

#ifndef APIFUZZ_CLI_H_
#define APIFUZZ_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace apifuzz {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitTargetError = 2,
  kExitNoFindings = 3,
};

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace apifuzz

#endif  // APIFUZZ_CLI_H_

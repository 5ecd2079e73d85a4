// Copyright 2026 The beliefrl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BELIEFRL_CLI_H_
#define BELIEFRL_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace beliefrl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Runs one subcommand. `args` excludes the program name. Human-readable
// summaries go to `out`; usage and error text go to `err`.
int CliDispatch(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

}  // namespace beliefrl

#endif  // BELIEFRL_CLI_H_

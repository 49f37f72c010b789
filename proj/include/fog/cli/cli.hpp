// Copyright 2026 The fogbridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FOG__CLI__CLI_HPP_
#define FOG__CLI__CLI_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fog::cli
{

/// Exit codes of the `fog` command.
enum ExitCode : int
{
  kExitOk = 0,
  kExitUsage = 1,
  kExitValidation = 2,
  kExitDeployFailed = 3,
  kExitUnknownDeployment = 4,
  kExitRuntime = 5,
};

/// FOG_STATE_DIR, else $XDG_STATE_HOME/fog, else ~/.local/state/fog.
std::filesystem::path state_dir();

/// Runs one `fog` command. `args` excludes the program name.
int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err);

}  // namespace fog::cli

#endif  // FOG__CLI__CLI_HPP_

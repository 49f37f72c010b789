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

#ifndef FOG__COMMON__LOG_HPP_
#define FOG__COMMON__LOG_HPP_

#include <spdlog/spdlog.h>

namespace fog
{

/// Configures the default logger from FOG_LOG (trace|debug|info|warn|error|off).
/// Logs go to stderr so stdout stays machine-readable.
void init_logging(const char * name);

}  // namespace fog

#endif  // FOG__COMMON__LOG_HPP_

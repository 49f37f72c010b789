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

#ifndef FOG__COMMON__SIGNALS_HPP_
#define FOG__COMMON__SIGNALS_HPP_

namespace fog
{

/// Blocks SIGINT, SIGTERM and SIGHUP in the calling thread. Call before any
/// thread starts so every thread inherits the mask.
void block_termination_signals();

/// Waits for one of the blocked termination signals and returns its number.
int wait_termination_signal();

}  // namespace fog

#endif  // FOG__COMMON__SIGNALS_HPP_

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

#include "fog/common/error.hpp"

namespace fog
{

std::string_view to_string(ErrorCode code)
{
  switch (code) {
    case ErrorCode::kInvalidTopic: return "InvalidTopic";
    case ErrorCode::kOversizePayload: return "OversizePayload";
    case ErrorCode::kRegistryUnavailable: return "RegistryUnavailable";
    case ErrorCode::kNodeShutDown: return "NodeShutDown";
    case ErrorCode::kGiveUp: return "GiveUp";
    case ErrorCode::kSyntaxError: return "SyntaxError";
    case ErrorCode::kUnknownKey: return "UnknownKey";
    case ErrorCode::kDuplicateNode: return "DuplicateNode";
    case ErrorCode::kDanglingGroupRef: return "DanglingGroupRef";
    case ErrorCode::kInvalidManifest: return "InvalidManifest";
    case ErrorCode::kStepFailed: return "StepFailed";
    case ErrorCode::kAlreadyDeployed: return "AlreadyDeployed";
    case ErrorCode::kUnknownDeployment: return "UnknownDeployment";
    case ErrorCode::kChannelAuthFailure: return "ChannelAuthFailure";
    case ErrorCode::kReplayDetected: return "ReplayDetected";
    case ErrorCode::kChannelDown: return "ChannelDown";
    case ErrorCode::kNegativeInput: return "NegativeInput";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kProvider: return "Provider";
  }
  return "Unknown";
}

}  // namespace fog

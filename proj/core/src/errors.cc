//
// Copyright 2026 The Behavior Cloak Authors
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
//

#include "cloak/errors.h"

namespace cloak {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
      return "invalid-input";
    case ErrorCode::kInfeasibleRegulation:
      return "infeasible-regulation";
    case ErrorCode::kDesignFailure:
      return "design-failure";
    case ErrorCode::kAssumptionViolation:
      return "assumption-violation";
    case ErrorCode::kInfeasibleInvariance:
      return "infeasible-invariance";
    case ErrorCode::kInconsistentData:
      return "inconsistent-data";
    case ErrorCode::kHorizonExhausted:
      return "horizon-exhausted";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<double> residual)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code),
      residual_(residual) {}

void ThrowInvalidInput(const std::string& message) {
  throw Error(ErrorCode::kInvalidInput, message);
}

}  // namespace cloak

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

#ifndef CLOAK_ERRORS_H_
#define CLOAK_ERRORS_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cloak {

// Failure categories; the CLI maps them onto exit codes.
enum class ErrorCode {
  kInvalidInput,
  kInfeasibleRegulation,
  kDesignFailure,
  kAssumptionViolation,
  kInfeasibleInvariance,
  kInconsistentData,
  kHorizonExhausted,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<double> residual = std::nullopt);

  ErrorCode code() const { return code_; }
  // Attained residual for the infeasibility errors, when one was computed.
  std::optional<double> residual() const { return residual_; }

 private:
  ErrorCode code_;
  std::optional<double> residual_;
};

[[noreturn]] void ThrowInvalidInput(const std::string& message);

}  // namespace cloak

#endif  // CLOAK_ERRORS_H_

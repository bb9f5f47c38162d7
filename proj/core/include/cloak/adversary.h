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

#ifndef CLOAK_ADVERSARY_H_
#define CLOAK_ADVERSARY_H_

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cloak/model.h"

namespace cloak {

struct BehaviourFit {
  double absolute = 0.0;    // min over x1 of ||Y - O_K x1 - T_K U||
  double normalized = 0.0;  // absolute / (1 + ||Y||)
  Eigen::VectorXd x1;       // minimum-norm minimizer
};

// Distance of a trajectory from the behaviour of `mode`. The forced
// response is removed by simulation; only the K m x n free-response matrix
// is ever formed.
BehaviourFit FitBehaviour(const StateSpaceMode& mode,
                          const Trajectory& trajectory);

// Normalized behaviour residual.
double ModeResidual(const StateSpaceMode& mode, const Trajectory& trajectory);

inline constexpr double kDefaultAcceptTol = 1e-6;

struct ClassificationReport {
  enum class Verdict { kUnique, kAmbiguous, kNone };

  std::map<int, double> residuals;
  std::vector<int> accepted;
  Verdict verdict = Verdict::kNone;
  int mode_id = 0;  // meaningful only for kUnique

  // "3", "AMBIGUOUS" or "NONE".
  std::string VerdictLabel() const;
};

ClassificationReport Classify(const ModeBank& bank,
                              const Trajectory& trajectory,
                              double accept_tol = kDefaultAcceptTol);

}  // namespace cloak

#endif  // CLOAK_ADVERSARY_H_

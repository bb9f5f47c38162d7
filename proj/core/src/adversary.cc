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

#include "cloak/adversary.h"

#include <cmath>
#include <string>

#include "cloak/errors.h"
#include "cloak/invariance.h"
#include "cloak/numerics.h"

namespace cloak {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

BehaviourFit FitBehaviour(const StateSpaceMode& mode,
                          const Trajectory& trajectory) {
  trajectory.Validate();
  if (trajectory.y.rows() != mode.outputs() ||
      trajectory.u.rows() != mode.inputs()) {
    ThrowInvalidInput("trajectory is " + std::to_string(trajectory.y.rows()) +
                      "-output/" + std::to_string(trajectory.u.rows()) +
                      "-input, mode " + std::to_string(mode.id()) + " is " +
                      std::to_string(mode.outputs()) + "/" +
                      std::to_string(mode.inputs()));
  }
  const Index horizon = trajectory.horizon();
  const Index m = mode.outputs();
  const VectorXd stacked = StackedOutputs(trajectory);
  const VectorXd free =
      stacked - LiftedResponse(mode, VectorXd::Zero(mode.states()),
                               trajectory.u);
  MatrixXd obs(horizon * m, mode.states());
  MatrixXd c_power = mode.c();
  for (Index k = 0; k < horizon; ++k) {
    obs.middleRows(k * m, m) = c_power;
    c_power = c_power * mode.a();
  }
  const LeastSquaresResult fit = LstsqMinNorm(obs, free);
  BehaviourFit out;
  out.absolute = fit.residual_norm;
  out.normalized = fit.residual_norm / (1.0 + stacked.norm());
  out.x1 = fit.x;
  return out;
}

double ModeResidual(const StateSpaceMode& mode, const Trajectory& trajectory) {
  return FitBehaviour(mode, trajectory).normalized;
}

std::string ClassificationReport::VerdictLabel() const {
  switch (verdict) {
    case Verdict::kUnique:
      return std::to_string(mode_id);
    case Verdict::kAmbiguous:
      return "AMBIGUOUS";
    case Verdict::kNone:
      return "NONE";
  }
  return "NONE";
}

ClassificationReport Classify(const ModeBank& bank,
                              const Trajectory& trajectory,
                              double accept_tol) {
  if (!(accept_tol >= 0.0) || !std::isfinite(accept_tol)) {
    ThrowInvalidInput("accept tolerance must be finite and >= 0");
  }
  ClassificationReport report;
  for (const StateSpaceMode& mode : bank.modes()) {
    const double residual = ModeResidual(mode, trajectory);
    report.residuals[mode.id()] = residual;
    if (residual <= accept_tol) report.accepted.push_back(mode.id());
  }
  if (report.accepted.size() == 1) {
    report.verdict = ClassificationReport::Verdict::kUnique;
    report.mode_id = report.accepted.front();
  } else if (report.accepted.empty()) {
    report.verdict = ClassificationReport::Verdict::kNone;
  } else {
    report.verdict = ClassificationReport::Verdict::kAmbiguous;
  }
  return report;
}

}  // namespace cloak

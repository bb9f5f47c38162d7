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

#ifndef CLOAK_REGULATION_H_
#define CLOAK_REGULATION_H_

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "cloak/model.h"
#include "cloak/numerics.h"

namespace cloak {

// (Pi, Gamma, Theta) solving
//   A' Pi - Pi A + B' Gamma = 0,
//   C' Pi - C = 0,
//   B' Theta - Pi B = 0,
// where primed matrices belong to the target mode.
struct RegulatorSolution {
  Eigen::MatrixXd pi;     // n' x n
  Eigen::MatrixXd gamma;  // l x n
  Eigen::MatrixXd theta;  // l x l
  double residual = 0.0;  // max absolute entry over the three equations
};

// Max absolute residual of the regulator equations for a candidate triple.
double RegulatorResidual(const StateSpaceMode& true_mode,
                         const StateSpaceMode& target_mode,
                         const Eigen::Ref<const Eigen::MatrixXd>& pi,
                         const Eigen::Ref<const Eigen::MatrixXd>& gamma,
                         const Eigen::Ref<const Eigen::MatrixXd>& theta);

// Vectorizes the three equations into one linear system in the stacked
// unknowns and returns its minimum-norm least-squares solution. Throws
// kInfeasibleRegulation (carrying the residual) when the residual exceeds
// tol.residual_tol: the target mode cannot reproduce the true outputs.
RegulatorSolution SolveRegulatorEquations(const StateSpaceMode& true_mode,
                                          const StateSpaceMode& target_mode,
                                          const ToleranceConfig& tol = {});

struct RiccatiOptions {
  double convergence_tol = 1e-12;
  int max_iterations = 10000;
};

// Gain R such that A' + B' R is Schur, from the discrete Riccati fixed-point
// iteration with identity state and input weights. Throws kDesignFailure if
// the iteration stalls or the resulting loop is not Schur.
Eigen::MatrixXd DesignStabilizingGain(const StateSpaceMode& target_mode,
                                      const ToleranceConfig& tol = {},
                                      const RiccatiOptions& options = {});

// Accepts a caller-supplied gain after checking it. Throws kDesignFailure if
// A' + B' R is not Schur, kInvalidInput on a shape mismatch.
Eigen::MatrixXd CheckStabilizingGain(const StateSpaceMode& target_mode,
                                     const Eigen::Ref<const Eigen::MatrixXd>& r,
                                     const ToleranceConfig& tol = {});

// u1bar(k) = R x1bar(k) + L x(k) + S u(k), started from x1bar(1) = Pi x(1).
struct TrackingController {
  Eigen::MatrixXd r;   // l x n'
  Eigen::MatrixXd l;   // l x n
  Eigen::MatrixXd s;   // l x l
  Eigen::MatrixXd pi;  // n' x n, maps a true initial state to x1bar(1)

  Eigen::VectorXd InitialVirtualState(
      const Eigen::Ref<const Eigen::VectorXd>& true_x1) const {
    return pi * true_x1;
  }
};

// L = Gamma - R Pi, S = Theta. Throws kInvalidInput if R does not stabilize
// the target mode.
TrackingController BuildTrackingController(const RegulatorSolution& solution,
                                           const Eigen::Ref<const Eigen::MatrixXd>& r,
                                           const StateSpaceMode& target_mode,
                                           const ToleranceConfig& tol = {});

struct RegulationDiagnostics {
  std::vector<double> state_error;   // ||x1bar(k) - Pi x(k)||
  std::vector<double> output_error;  // ||y1bar(k) - y(k)||
  double max_state_error = 0.0;
  double max_output_error = 0.0;
  Eigen::MatrixXd u1bar;  // l x (K-1)
  Eigen::MatrixXd y1bar;  // m x K
};

// Closes the virtual target loop along a recorded trajectory (states
// required) and reports the tracking errors. initial_offset perturbs
// x1bar(1) away from Pi x(1).
RegulationDiagnostics VerifyRegulation(
    const StateSpaceMode& true_mode, const StateSpaceMode& target_mode,
    const TrackingController& controller, const Trajectory& trajectory,
    const std::optional<Eigen::VectorXd>& initial_offset = std::nullopt);

}  // namespace cloak

#endif  // CLOAK_REGULATION_H_

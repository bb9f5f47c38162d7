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

#include "cloak/regulation.h"

#include <algorithm>
#include <string>

#include <Eigen/LU>
#include <unsupported/Eigen/KroneckerProduct>

#include "cloak/errors.h"

namespace cloak {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void RequireCompatible(const StateSpaceMode& true_mode,
                       const StateSpaceMode& target_mode) {
  if (true_mode.outputs() != target_mode.outputs() ||
      true_mode.inputs() != target_mode.inputs()) {
    ThrowInvalidInput("modes " + std::to_string(true_mode.id()) + " and " +
                      std::to_string(target_mode.id()) +
                      " do not share output and input dimensions");
  }
}

void RequireShape(const Eigen::Ref<const MatrixXd>& m, Index rows, Index cols,
                  const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    ThrowInvalidInput(std::string(what) + " is " + std::to_string(m.rows()) +
                      "x" + std::to_string(m.cols()) + ", expected " +
                      std::to_string(rows) + "x" + std::to_string(cols));
  }
}

MatrixXd Unvec(const VectorXd& v, Index offset, Index rows, Index cols) {
  return v.segment(offset, rows * cols).reshaped(rows, cols);
}

}  // namespace

double RegulatorResidual(const StateSpaceMode& true_mode,
                         const StateSpaceMode& target_mode,
                         const Eigen::Ref<const MatrixXd>& pi,
                         const Eigen::Ref<const MatrixXd>& gamma,
                         const Eigen::Ref<const MatrixXd>& theta) {
  RequireCompatible(true_mode, target_mode);
  const Index n = true_mode.states();
  const Index n_t = target_mode.states();
  const Index l = true_mode.inputs();
  RequireShape(pi, n_t, n, "Pi");
  RequireShape(gamma, l, n, "Gamma");
  RequireShape(theta, l, l, "Theta");

  const MatrixXd r1 = target_mode.a() * pi - pi * true_mode.a() +
                      target_mode.b() * gamma;
  const MatrixXd r2 = target_mode.c() * pi - true_mode.c();
  const MatrixXd r3 = target_mode.b() * theta - pi * true_mode.b();
  return std::max({r1.cwiseAbs().maxCoeff(), r2.cwiseAbs().maxCoeff(),
                   r3.cwiseAbs().maxCoeff()});
}

RegulatorSolution SolveRegulatorEquations(const StateSpaceMode& true_mode,
                                          const StateSpaceMode& target_mode,
                                          const ToleranceConfig& tol) {
  tol.Validate();
  RequireCompatible(true_mode, target_mode);
  const Index n = true_mode.states();
  const Index n_t = target_mode.states();
  const Index m = true_mode.outputs();
  const Index l = true_mode.inputs();

  // Unknowns: [vec(Pi); vec(Gamma); vec(Theta)], column-major vec, with
  // vec(X Y Z) = (Z^T kron X) vec(Y).
  const Index n_pi = n_t * n;
  const Index n_gamma = l * n;
  const Index n_theta = l * l;
  const Index rows = n_t * n + m * n + n_t * l;
  MatrixXd system = MatrixXd::Zero(rows, n_pi + n_gamma + n_theta);
  VectorXd rhs = VectorXd::Zero(rows);

  const MatrixXd eye_n = MatrixXd::Identity(n, n);
  const MatrixXd eye_nt = MatrixXd::Identity(n_t, n_t);
  const MatrixXd eye_l = MatrixXd::Identity(l, l);

  Index row = 0;
  system.block(row, 0, n_t * n, n_pi) =
      Eigen::kroneckerProduct(eye_n, target_mode.a()).eval() -
      Eigen::kroneckerProduct(true_mode.a().transpose(), eye_nt).eval();
  system.block(row, n_pi, n_t * n, n_gamma) =
      Eigen::kroneckerProduct(eye_n, target_mode.b());
  row += n_t * n;

  system.block(row, 0, m * n, n_pi) =
      Eigen::kroneckerProduct(eye_n, target_mode.c());
  rhs.segment(row, m * n) = true_mode.c().reshaped();
  row += m * n;

  system.block(row, 0, n_t * l, n_pi) =
      -Eigen::kroneckerProduct(true_mode.b().transpose(), eye_nt).eval();
  system.block(row, n_pi + n_gamma, n_t * l, n_theta) =
      Eigen::kroneckerProduct(eye_l, target_mode.b());

  const LeastSquaresResult ls = LstsqMinNorm(system, rhs, tol);

  RegulatorSolution solution;
  solution.pi = Unvec(ls.x, 0, n_t, n);
  solution.gamma = Unvec(ls.x, n_pi, l, n);
  solution.theta = Unvec(ls.x, n_pi + n_gamma, l, l);
  solution.residual = RegulatorResidual(true_mode, target_mode, solution.pi,
                                        solution.gamma, solution.theta);
  if (solution.residual > tol.residual_tol) {
    throw Error(ErrorCode::kInfeasibleRegulation,
                "regulator equations for mode " +
                    std::to_string(true_mode.id()) + " -> " +
                    std::to_string(target_mode.id()) +
                    " have no exact solution (residual " +
                    std::to_string(solution.residual) + ")",
                solution.residual);
  }
  return solution;
}

MatrixXd DesignStabilizingGain(const StateSpaceMode& target_mode,
                               const ToleranceConfig& tol,
                               const RiccatiOptions& options) {
  tol.Validate();
  const MatrixXd& a = target_mode.a();
  const MatrixXd& b = target_mode.b();
  const Index n = target_mode.states();
  const Index l = target_mode.inputs();
  const MatrixXd q = MatrixXd::Identity(n, n);
  const MatrixXd rw = MatrixXd::Identity(l, l);

  MatrixXd p = q;
  bool converged = false;
  for (int it = 0; it < options.max_iterations; ++it) {
    const MatrixXd bt_p = b.transpose() * p;
    const MatrixXd gain_term =
        (rw + bt_p * b).partialPivLu().solve(bt_p * a);
    MatrixXd next = a.transpose() * p * a - (a.transpose() * p * b) * gain_term + q;
    next = 0.5 * (next + next.transpose()).eval();
    if (!next.allFinite()) break;
    const double change = (next - p).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, next.cwiseAbs().maxCoeff());
    p = std::move(next);
    // Relative to the iterate's size: an absolute 1e-12 is below round-off
    // once P grows past ~1e4.
    if (change <= options.convergence_tol * scale) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::kDesignFailure,
                "Riccati iteration did not converge for mode " +
                    std::to_string(target_mode.id()));
  }
  const MatrixXd bt_p = b.transpose() * p;
  const MatrixXd r = -(rw + bt_p * b).partialPivLu().solve(bt_p * a);
  if (!IsSchur(a + b * r, tol)) {
    throw Error(ErrorCode::kDesignFailure,
                "Riccati gain does not stabilize mode " +
                    std::to_string(target_mode.id()));
  }
  return r;
}

MatrixXd CheckStabilizingGain(const StateSpaceMode& target_mode,
                              const Eigen::Ref<const MatrixXd>& r,
                              const ToleranceConfig& tol) {
  RequireShape(r, target_mode.inputs(), target_mode.states(), "gain R");
  RequireFinite(r, "gain R");
  const double radius =
      SpectralRadius(target_mode.a() + target_mode.b() * r);
  if (radius > 1.0 - tol.schur_margin) {
    throw Error(ErrorCode::kDesignFailure,
                "gain leaves closed-loop spectral radius " +
                    std::to_string(radius) + " for mode " +
                    std::to_string(target_mode.id()));
  }
  return r;
}

TrackingController BuildTrackingController(const RegulatorSolution& solution,
                                           const Eigen::Ref<const MatrixXd>& r,
                                           const StateSpaceMode& target_mode,
                                           const ToleranceConfig& tol) {
  const Index l = solution.theta.rows();
  RequireShape(r, l, solution.pi.rows(), "gain R");
  if (target_mode.states() != solution.pi.rows() ||
      target_mode.inputs() != l) {
    ThrowInvalidInput("regulator solution does not match the target mode");
  }
  if (!IsSchur(target_mode.a() + target_mode.b() * r, tol)) {
    ThrowInvalidInput("gain R does not make A' + B'R Schur");
  }
  TrackingController controller;
  controller.r = r;
  controller.l = solution.gamma - r * solution.pi;
  controller.s = solution.theta;
  controller.pi = solution.pi;
  return controller;
}

RegulationDiagnostics VerifyRegulation(
    const StateSpaceMode& true_mode, const StateSpaceMode& target_mode,
    const TrackingController& controller, const Trajectory& trajectory,
    const std::optional<VectorXd>& initial_offset) {
  trajectory.Validate();
  if (!trajectory.has_states()) {
    ThrowInvalidInput("regulation check needs the recorded true states");
  }
  RequireCompatible(true_mode, target_mode);
  const MatrixXd& x = *trajectory.x;
  if (x.rows() != true_mode.states() ||
      trajectory.y.rows() != true_mode.outputs() ||
      trajectory.u.rows() != true_mode.inputs()) {
    ThrowInvalidInput("trajectory dimensions do not match the true mode");
  }
  RequireShape(controller.pi, target_mode.states(), true_mode.states(), "Pi");

  const Index horizon = trajectory.horizon();
  RegulationDiagnostics diag;
  diag.state_error.resize(static_cast<std::size_t>(horizon));
  diag.output_error.resize(static_cast<std::size_t>(horizon));
  diag.u1bar.resize(true_mode.inputs(), horizon - 1);
  diag.y1bar.resize(true_mode.outputs(), horizon);

  VectorXd xbar = controller.InitialVirtualState(x.col(0));
  if (initial_offset) {
    if (initial_offset->size() != xbar.size()) {
      ThrowInvalidInput("initial offset has the wrong size");
    }
    xbar += *initial_offset;
  }
  for (Index k = 0; k < horizon; ++k) {
    diag.y1bar.col(k) = target_mode.c() * xbar;
    const auto idx = static_cast<std::size_t>(k);
    diag.output_error[idx] = (diag.y1bar.col(k) - trajectory.y.col(k)).norm();
    diag.state_error[idx] = (xbar - controller.pi * x.col(k)).norm();
    if (k + 1 < horizon) {
      const VectorXd ubar = controller.r * xbar + controller.l * x.col(k) +
                            controller.s * trajectory.u.col(k);
      diag.u1bar.col(k) = ubar;
      xbar = target_mode.a() * xbar + target_mode.b() * ubar;
    }
  }
  diag.max_state_error =
      *std::max_element(diag.state_error.begin(), diag.state_error.end());
  diag.max_output_error =
      *std::max_element(diag.output_error.begin(), diag.output_error.end());
  return diag;
}

}  // namespace cloak

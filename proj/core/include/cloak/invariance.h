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

#ifndef CLOAK_INVARIANCE_H_
#define CLOAK_INVARIANCE_H_

#include <cstdint>

#include <Eigen/Core>

#include "cloak/model.h"
#include "cloak/numerics.h"

namespace cloak {

// Affine utility f(Y) = F Y + mu over the stacked output of horizon K.
// Only F matters for invariance: mu cancels in f(Y + dY) = f(Y).
class UtilitySpec {
 public:
  UtilitySpec(Eigen::MatrixXd f, Eigen::VectorXd mu, Eigen::Index horizon,
              const ToleranceConfig& tol = {});

  // F = (1/K) [I_m ... I_m]: the per-channel time average.
  static UtilitySpec Average(Eigen::Index horizon, Eigen::Index outputs);

  const Eigen::MatrixXd& f() const { return f_; }
  const Eigen::VectorXd& mu() const { return mu_; }
  Eigen::Index horizon() const { return horizon_; }
  Eigen::Index outputs() const { return f_.cols() / horizon_; }
  Eigen::Index rank() const { return rank_; }
  // Largest singular value of F.
  double norm() const { return norm_; }
  // rank(F) < K m, i.e. some output perturbation leaves f unchanged.
  bool kernel_nontrivial() const { return rank_ < f_.cols(); }

  Eigen::VectorXd Evaluate(const Eigen::Ref<const Eigen::VectorXd>& y) const;

  // theta - F^+ F theta without forming the K m x K m projector.
  Eigen::VectorXd ProjectOntoKernel(
      const Eigen::Ref<const Eigen::VectorXd>& theta) const;

 private:
  Eigen::MatrixXd f_;
  Eigen::VectorXd mu_;
  Eigen::Index horizon_;
  Eigen::Index rank_ = 0;
  double norm_ = 0.0;
  Eigen::MatrixXd row_space_;  // orthonormal basis of Im[F^T]
};

// Stacked response Y = O_K x1 + T_K U as dense matrices:
//   block i of O_K is C A^(i-1),
//   block (i, j) of T_K is C A^(i-j-1) B for i > j and zero otherwise.
struct LiftedOperators {
  Eigen::MatrixXd o;  // K m x n
  Eigen::MatrixXd t;  // K m x (K-1) l
  Eigen::Index horizon = 0;
  int mode_id = 0;
};

LiftedOperators BuildLiftedOperators(const StateSpaceMode& mode,
                                     Eigen::Index horizon);

// O_K x1 + T_K vec(U) evaluated by running the recursion; U is l x (K-1).
Eigen::VectorXd LiftedResponse(const StateSpaceMode& mode,
                               const Eigen::Ref<const Eigen::VectorXd>& x1,
                               const Eigen::Ref<const Eigen::MatrixXd>& u);

// [O_K T_K]^T r evaluated by the backward (costate) recursion. Returns the
// stacked (x1; vec(U)) gradient.
Eigen::VectorXd LiftedAdjoint(const StateSpaceMode& mode,
                              const Eigen::Ref<const Eigen::VectorXd>& r,
                              Eigen::Index horizon);

// I - F^+ F.
Eigen::MatrixXd KernelProjector(const UtilitySpec& spec,
                                const ToleranceConfig& tol = {});

// Off-line plan for the utility-neutral part of the virtual target system:
// starting at x2_init and driven by u2, the target's output equals delta_y,
// which lies in Ker[F].
struct KernelPlan {
  int target_mode_id = 0;
  Eigen::VectorXd x2_init;  // n'
  Eigen::MatrixXd u2;       // l x (K-1)
  Eigen::VectorXd delta_y;  // K m, stacked
  Eigen::VectorXd theta;    // K m kernel parameter
  double residual = 0.0;    // ||O x2_init + T vec(u2) - (I - F^+F) theta||
  std::uint64_t seed = 0;
  double magnitude = 0.0;

  Eigen::Index horizon() const { return u2.cols() + 1; }
};

KernelPlan ZeroPlan(const StateSpaceMode& target_mode, Eigen::Index horizon);

struct InvarianceOptions {
  int max_draws = 16;
  IterativeLeastSquaresOptions solver{1e-14, 20000};
  // Fallback projection onto Ker[F [O T]] is attempted when
  // rank-deficient targets make random kernel directions unreachable and
  // q * (n + (K-1) l) stays below this many entries.
  Eigen::Index fallback_max_entries = 50'000'000;
};

// Draw-project-solve: theta ~ N(0, I) from `seed`, delta = (I - F^+F) theta
// rescaled to ||delta|| = magnitude, then minimum-norm least squares of
// [O T](x; U) = delta through the recursion and its adjoint, so nothing of
// size K m x K m is ever formed. Accepts when the residual is at most
// residual_tol * (1 + magnitude).
//
// Throws kAssumptionViolation when Ker[F] is trivial (magnitude > 0), and
// kInfeasibleInvariance when no reachable nonzero element of Ker[F] exists.
KernelPlan SolveUtilityInvariance(const StateSpaceMode& target_mode,
                                  const UtilitySpec& spec, double magnitude,
                                  std::uint64_t seed,
                                  const ToleranceConfig& tol = {},
                                  const InvarianceOptions& options = {});

// Orthonormal basis of Ker[O_K  T_K  (F^+F - I)] over stacked (x; U; theta).
Eigen::MatrixXd InvarianceNullspace(const LiftedOperators& ops,
                                    const UtilitySpec& spec,
                                    const ToleranceConfig& tol = {});

// Dense route for small K: a seeded combination of the nullspace basis,
// scaled so ||delta_y|| = magnitude.
KernelPlan SolveUtilityInvarianceDense(const StateSpaceMode& target_mode,
                                       const UtilitySpec& spec,
                                       double magnitude, std::uint64_t seed,
                                       const ToleranceConfig& tol = {});

// Stacks (x2_init; vec(u2); theta) in the column order used by
// InvarianceNullspace.
Eigen::VectorXd StackPlan(const KernelPlan& plan);

// Re-simulates the plan and checks it: returns ||F delta_y|| relative to
// 1 + ||F|| ||delta_y|| and the simulation mismatch.
struct PlanCheck {
  double kernel_violation = 0.0;
  double simulation_mismatch = 0.0;
};
PlanCheck CheckPlan(const StateSpaceMode& target_mode, const UtilitySpec& spec,
                    const KernelPlan& plan);

}  // namespace cloak

#endif  // CLOAK_INVARIANCE_H_

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

#include "cloak/invariance.h"

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include <Eigen/SVD>

#include "cloak/errors.h"

namespace cloak {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Relative size below which a projected draw is treated as zero.
constexpr double kDegenerateDraw = 1e-10;

void RequireHorizon(Index horizon) {
  if (horizon < 2) {
    ThrowInvalidInput("horizon K must be >= 2, got " +
                      std::to_string(horizon));
  }
}

void RequireBound(const StateSpaceMode& mode, const UtilitySpec& spec) {
  if (spec.outputs() != mode.outputs()) {
    ThrowInvalidInput("utility spec is for " +
                      std::to_string(spec.outputs()) +
                      " outputs, target mode has " +
                      std::to_string(mode.outputs()));
  }
}

void RequireMagnitude(double magnitude) {
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
    ThrowInvalidInput("distortion magnitude must be finite and >= 0");
  }
}

LinearOperator LiftedOperator(const StateSpaceMode& mode, Index horizon) {
  const Index n = mode.states();
  const Index l = mode.inputs();
  LinearOperator op;
  op.rows = horizon * mode.outputs();
  op.cols = n + (horizon - 1) * l;
  op.apply = [&mode, n, l, horizon](const VectorXd& w) {
    return LiftedResponse(mode, w.head(n),
                          w.tail((horizon - 1) * l).reshaped(l, horizon - 1));
  };
  op.apply_adjoint = [&mode, horizon](const VectorXd& r) {
    return LiftedAdjoint(mode, r, horizon);
  };
  return op;
}

// Splits a stacked (x; vec(U)) vector into a plan.
KernelPlan PlanFromStacked(const StateSpaceMode& mode, Index horizon,
                           const VectorXd& w) {
  const Index n = mode.states();
  const Index l = mode.inputs();
  KernelPlan plan;
  plan.target_mode_id = mode.id();
  plan.x2_init = w.head(n);
  plan.u2 = w.segment(n, (horizon - 1) * l).reshaped(l, horizon - 1);
  return plan;
}

// Fills delta_y from the plan's own simulation, rescales everything so the
// distortion has exactly the requested size, and records the residual.
void FinalizePlan(const StateSpaceMode& mode, const UtilitySpec& spec,
                  double magnitude, KernelPlan& plan) {
  plan.delta_y = LiftedResponse(mode, plan.x2_init, plan.u2);
  const double size = plan.delta_y.norm();
  if (size > 0.0) {
    const double scale = magnitude / size;
    plan.x2_init *= scale;
    plan.u2 *= scale;
    plan.theta *= scale;
    plan.delta_y *= scale;
  }
  plan.magnitude = magnitude;
  plan.residual =
      (plan.delta_y - spec.ProjectOntoKernel(plan.theta)).norm();
}

void RequireInKernel(const UtilitySpec& spec, const KernelPlan& plan,
                     const ToleranceConfig& tol) {
  const double violation = (spec.f() * plan.delta_y).norm();
  const double bound =
      tol.residual_tol * (1.0 + spec.norm() * plan.delta_y.norm());
  if (violation > bound) {
    throw Error(ErrorCode::kInfeasibleInvariance,
                "planned distortion leaves Ker[F] (||F dY|| = " +
                    std::to_string(violation) + ")",
                violation);
  }
}

}  // namespace

UtilitySpec::UtilitySpec(MatrixXd f, VectorXd mu, Index horizon,
                         const ToleranceConfig& tol)
    : f_(std::move(f)), mu_(std::move(mu)), horizon_(horizon) {
  RequireHorizon(horizon_);
  if (f_.rows() == 0 || f_.cols() == 0 || f_.cols() % horizon_ != 0) {
    ThrowInvalidInput("utility F is " + std::to_string(f_.rows()) + "x" +
                      std::to_string(f_.cols()) +
                      ", columns must be a positive multiple of K = " +
                      std::to_string(horizon_));
  }
  if (mu_.size() != f_.rows()) {
    ThrowInvalidInput("utility mu has " + std::to_string(mu_.size()) +
                      " entries, F has " + std::to_string(f_.rows()) +
                      " rows");
  }
  RequireFinite(f_, "utility F");
  RequireFinite(mu_, "utility mu");
  tol.Validate();
  // Im[F^T] is at most q-dimensional, so its basis is cheap even at large K.
  const MatrixXd ft = f_.transpose();
  Eigen::BDCSVD<MatrixXd> svd(ft, Eigen::ComputeThinU);
  const VectorXd& sigma = svd.singularValues();
  norm_ = sigma.size() > 0 ? sigma(0) : 0.0;
  const double threshold = RankThreshold(ft, norm_, tol);
  while (rank_ < sigma.size() && sigma(rank_) > threshold) ++rank_;
  row_space_ = svd.matrixU().leftCols(rank_);
}

UtilitySpec UtilitySpec::Average(Index horizon, Index outputs) {
  RequireHorizon(horizon);
  if (outputs < 1) ThrowInvalidInput("average utility needs m >= 1");
  MatrixXd f(outputs, horizon * outputs);
  const MatrixXd block =
      MatrixXd::Identity(outputs, outputs) / static_cast<double>(horizon);
  for (Index k = 0; k < horizon; ++k) {
    f.middleCols(k * outputs, outputs) = block;
  }
  return UtilitySpec(std::move(f), VectorXd::Zero(outputs), horizon);
}

VectorXd UtilitySpec::Evaluate(const Eigen::Ref<const VectorXd>& y) const {
  if (y.size() != f_.cols()) {
    ThrowInvalidInput("stacked output has " + std::to_string(y.size()) +
                      " entries, utility expects " +
                      std::to_string(f_.cols()));
  }
  return f_ * y + mu_;
}

VectorXd UtilitySpec::ProjectOntoKernel(
    const Eigen::Ref<const VectorXd>& theta) const {
  return theta - row_space_ * (row_space_.transpose() * theta);
}

LiftedOperators BuildLiftedOperators(const StateSpaceMode& mode,
                                     Index horizon) {
  RequireHorizon(horizon);
  const Index n = mode.states();
  const Index m = mode.outputs();
  const Index l = mode.inputs();
  LiftedOperators ops;
  ops.horizon = horizon;
  ops.mode_id = mode.id();
  ops.o.resize(horizon * m, n);
  ops.t = MatrixXd::Zero(horizon * m, (horizon - 1) * l);

  // markov[i] = C A^i B, needed up to i = K-2.
  MatrixXd c_power = mode.c();
  for (Index i = 0; i < horizon; ++i) {
    ops.o.middleRows(i * m, m) = c_power;
    if (i + 1 < horizon) {
      const MatrixXd markov = c_power * mode.b();
      // Block diagonal i+1 below the main one.
      for (Index j = 0; j + i + 1 < horizon; ++j) {
        ops.t.block((j + i + 1) * m, j * l, m, l) = markov;
      }
    }
    c_power = c_power * mode.a();
  }
  return ops;
}

VectorXd LiftedResponse(const StateSpaceMode& mode,
                        const Eigen::Ref<const VectorXd>& x1,
                        const Eigen::Ref<const MatrixXd>& u) {
  if (x1.size() != mode.states() || u.rows() != mode.inputs()) {
    ThrowInvalidInput("lifted response: dimension mismatch");
  }
  const Index horizon = u.cols() + 1;
  const Index m = mode.outputs();
  VectorXd y(horizon * m);
  VectorXd x = x1;
  VectorXd next(x.size());
  for (Index k = 0; k < horizon; ++k) {
    y.segment(k * m, m).noalias() = mode.c() * x;
    if (k + 1 < horizon) {
      next.noalias() = mode.a() * x;
      next.noalias() += mode.b() * u.col(k);
      x.swap(next);
    }
  }
  return y;
}

VectorXd LiftedAdjoint(const StateSpaceMode& mode,
                       const Eigen::Ref<const VectorXd>& r, Index horizon) {
  RequireHorizon(horizon);
  const Index n = mode.states();
  const Index m = mode.outputs();
  const Index l = mode.inputs();
  if (r.size() != horizon * m) {
    ThrowInvalidInput("lifted adjoint: residual has wrong size");
  }
  VectorXd out(n + (horizon - 1) * l);
  // costate(k) = sum_{i >= k} (A^T)^(i-k) C^T r(i); the gradient in u(j) is
  // B^T costate(j+1) and the gradient in x1 is costate(1).
  VectorXd costate = mode.c().transpose() * r.segment((horizon - 1) * m, m);
  VectorXd next(n);
  for (Index k = horizon - 2; k >= 0; --k) {
    out.segment(n + k * l, l).noalias() = mode.b().transpose() * costate;
    next.noalias() = mode.a().transpose() * costate;
    next.noalias() += mode.c().transpose() * r.segment(k * m, m);
    costate.swap(next);
  }
  out.head(n) = costate;
  return out;
}

MatrixXd KernelProjector(const UtilitySpec& spec, const ToleranceConfig& tol) {
  const Index size = spec.f().cols();
  return MatrixXd::Identity(size, size) - PseudoInverse(spec.f(), tol) * spec.f();
}

KernelPlan ZeroPlan(const StateSpaceMode& target_mode, Index horizon) {
  RequireHorizon(horizon);
  KernelPlan plan;
  plan.target_mode_id = target_mode.id();
  plan.x2_init = VectorXd::Zero(target_mode.states());
  plan.u2 = MatrixXd::Zero(target_mode.inputs(), horizon - 1);
  plan.delta_y = VectorXd::Zero(horizon * target_mode.outputs());
  plan.theta = VectorXd::Zero(horizon * target_mode.outputs());
  return plan;
}

KernelPlan SolveUtilityInvariance(const StateSpaceMode& target_mode,
                                  const UtilitySpec& spec, double magnitude,
                                  std::uint64_t seed,
                                  const ToleranceConfig& tol,
                                  const InvarianceOptions& options) {
  tol.Validate();
  RequireBound(target_mode, spec);
  RequireMagnitude(magnitude);
  const Index horizon = spec.horizon();
  if (magnitude == 0.0) {
    KernelPlan plan = ZeroPlan(target_mode, horizon);
    plan.seed = seed;
    return plan;
  }
  if (!spec.kernel_nontrivial()) {
    throw Error(ErrorCode::kAssumptionViolation,
                "Ker[F] is trivial; only the zero distortion keeps the "
                "utility unchanged");
  }

  const LinearOperator op = LiftedOperator(target_mode, horizon);
  std::mt19937_64 rng(seed);
  const double accept = tol.residual_tol * (1.0 + magnitude);
  double best_residual = std::numeric_limits<double>::infinity();

  for (int draw = 0; draw < options.max_draws; ++draw) {
    VectorXd theta = GaussianVector(op.rows, rng);
    VectorXd delta = spec.ProjectOntoKernel(theta);
    const double size = delta.norm();
    if (size <= kDegenerateDraw * theta.norm()) continue;
    theta *= magnitude / size;
    delta *= magnitude / size;

    const IterativeLeastSquaresResult ls =
        IterativeLstsq(op, delta, options.solver);
    best_residual = std::min(best_residual, ls.residual_norm);
    if (ls.residual_norm > accept) continue;

    KernelPlan plan = PlanFromStacked(target_mode, horizon, ls.x);
    plan.theta = std::move(theta);
    plan.seed = seed;
    FinalizePlan(target_mode, spec, magnitude, plan);
    RequireInKernel(spec, plan, tol);
    return plan;
  }

  // Random kernel directions are only reachable when [O T] has full row
  // rank. Otherwise search the behaviour side directly: any (x; U) in
  // Ker[F [O T]] produces an output inside Ker[F].
  const Index q = spec.f().rows();
  if (q * op.cols <= options.fallback_max_entries) {
    MatrixXd g_t(op.cols, q);
    for (Index i = 0; i < q; ++i) {
      g_t.col(i) = op.apply_adjoint(spec.f().row(i).transpose());
    }
    const MatrixXd g_range = RangeBasis(g_t, tol);
    for (int draw = 0; draw < options.max_draws; ++draw) {
      VectorXd w = GaussianVector(op.cols, rng);
      w -= g_range * (g_range.transpose() * w);
      const VectorXd delta = op.apply(w);
      if (delta.norm() <= kDegenerateDraw * w.norm()) continue;
      KernelPlan plan = PlanFromStacked(target_mode, horizon, w);
      plan.theta = delta;
      plan.seed = seed;
      FinalizePlan(target_mode, spec, magnitude, plan);
      RequireInKernel(spec, plan, tol);
      return plan;
    }
  }

  throw Error(ErrorCode::kInfeasibleInvariance,
              "no reachable nonzero output of mode " +
                  std::to_string(target_mode.id()) + " lies in Ker[F]",
              best_residual);
}

MatrixXd InvarianceNullspace(const LiftedOperators& ops,
                             const UtilitySpec& spec,
                             const ToleranceConfig& tol) {
  if (ops.horizon != spec.horizon() || ops.o.rows() != spec.f().cols()) {
    ThrowInvalidInput("lifted operators and utility spec disagree on K m");
  }
  const Index rows = ops.o.rows();
  MatrixXd block(rows, ops.o.cols() + ops.t.cols() + rows);
  block << ops.o, ops.t, -KernelProjector(spec, tol);
  return NullspaceBasis(block, tol);
}

KernelPlan SolveUtilityInvarianceDense(const StateSpaceMode& target_mode,
                                       const UtilitySpec& spec,
                                       double magnitude, std::uint64_t seed,
                                       const ToleranceConfig& tol) {
  tol.Validate();
  RequireBound(target_mode, spec);
  RequireMagnitude(magnitude);
  const Index horizon = spec.horizon();
  if (magnitude == 0.0) {
    KernelPlan plan = ZeroPlan(target_mode, horizon);
    plan.seed = seed;
    return plan;
  }
  if (!spec.kernel_nontrivial()) {
    throw Error(ErrorCode::kAssumptionViolation,
                "Ker[F] is trivial; only the zero distortion keeps the "
                "utility unchanged");
  }
  const LiftedOperators ops = BuildLiftedOperators(target_mode, horizon);
  const MatrixXd basis = InvarianceNullspace(ops, spec, tol);
  const Index n = target_mode.states();
  const Index nu = ops.t.cols();
  std::mt19937_64 rng(seed);
  for (int draw = 0; draw < 16 && basis.cols() > 0; ++draw) {
    const VectorXd w = basis * GaussianVector(basis.cols(), rng);
    const VectorXd delta = ops.o * w.head(n) + ops.t * w.segment(n, nu);
    if (delta.norm() <= kDegenerateDraw * w.norm()) continue;
    KernelPlan plan = PlanFromStacked(target_mode, horizon, w);
    plan.theta = w.tail(ops.o.rows());
    plan.seed = seed;
    FinalizePlan(target_mode, spec, magnitude, plan);
    RequireInKernel(spec, plan, tol);
    return plan;
  }
  throw Error(ErrorCode::kInfeasibleInvariance,
              "nullspace of [O T (F^+F - I)] contains no nonzero output");
}

VectorXd StackPlan(const KernelPlan& plan) {
  VectorXd w(plan.x2_init.size() + plan.u2.size() + plan.theta.size());
  w << plan.x2_init, plan.u2.reshaped(), plan.theta;
  return w;
}

PlanCheck CheckPlan(const StateSpaceMode& target_mode, const UtilitySpec& spec,
                    const KernelPlan& plan) {
  RequireBound(target_mode, spec);
  if (plan.horizon() != spec.horizon()) {
    ThrowInvalidInput("plan horizon " + std::to_string(plan.horizon()) +
                      " does not match utility horizon " +
                      std::to_string(spec.horizon()));
  }
  PlanCheck check;
  const VectorXd simulated =
      LiftedResponse(target_mode, plan.x2_init, plan.u2);
  check.simulation_mismatch = (simulated - plan.delta_y).norm() /
                              (1.0 + plan.delta_y.norm());
  check.kernel_violation = (spec.f() * plan.delta_y).norm() /
                           (1.0 + spec.norm() * plan.delta_y.norm());
  return check;
}

}  // namespace cloak

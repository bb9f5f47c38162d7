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

#include "cloak/engine.h"

#include <string>
#include <utility>

#include "cloak/errors.h"

namespace cloak {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void RequireShape(const MatrixXd& m, Index rows, Index cols,
                  const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    ThrowInvalidInput(what + " is " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()) + ", expected " +
                      std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void RequireSize(const VectorXd& v, Index size, const std::string& what) {
  if (v.size() != size) {
    ThrowInvalidInput(what + " has " + std::to_string(v.size()) +
                      " entries, expected " + std::to_string(size));
  }
}

}  // namespace

void DistortionConfig::Validate() const {
  if (horizon < 2) ThrowInvalidInput("engine horizon must be >= 2");
  if (true_mode.outputs() != target_mode.outputs() ||
      true_mode.inputs() != target_mode.inputs()) {
    ThrowInvalidInput("true and target modes differ in m or l");
  }
  const Index n = true_mode.states();
  const Index n_t = target_mode.states();
  const Index l = true_mode.inputs();
  RequireShape(controller.pi, n_t, n, "controller Pi");
  RequireShape(controller.r, l, n_t, "controller R");
  RequireShape(controller.l, l, n, "controller L");
  RequireShape(controller.s, l, l, "controller S");
  if (plan.target_mode_id != target_mode.id()) {
    ThrowInvalidInput("plan was built for mode " +
                      std::to_string(plan.target_mode_id) +
                      ", target is mode " + std::to_string(target_mode.id()));
  }
  RequireSize(plan.x2_init, n_t, "plan x2_init");
  RequireShape(plan.u2, l, horizon - 1, "plan U2");
}

StateEstimate ReconstructState(const StateSpaceMode& mode,
                               const Eigen::Ref<const MatrixXd>& u_window,
                               const Eigen::Ref<const MatrixXd>& y_window,
                               const ToleranceConfig& tol) {
  const Index w = y_window.cols();
  const Index n = mode.states();
  const Index m = mode.outputs();
  if (w < n) {
    ThrowInvalidInput("reconstruction window of " + std::to_string(w) +
                      " samples is shorter than the state dimension " +
                      std::to_string(n));
  }
  if (y_window.rows() != m || u_window.rows() != mode.inputs() ||
      (u_window.cols() != w - 1 && u_window.cols() != w)) {
    ThrowInvalidInput("reconstruction window has inconsistent dimensions");
  }

  // Output window minus the forced response, fitted by the free response.
  MatrixXd forced_y(m, w);
  VectorXd x = VectorXd::Zero(n);
  MatrixXd obs(w * m, n);
  MatrixXd c_power = mode.c();
  for (Index k = 0; k < w; ++k) {
    forced_y.col(k) = mode.c() * x;
    obs.middleRows(k * m, m) = c_power;
    c_power = c_power * mode.a();
    if (k + 1 < w) x = mode.a() * x + mode.b() * u_window.col(k);
  }
  const VectorXd target = (y_window - forced_y).reshaped();
  const LeastSquaresResult fit = LstsqMinNorm(obs, target, tol);
  const double bound =
      tol.residual_tol * (1.0 + y_window.reshaped().norm());
  if (fit.residual_norm > bound) {
    throw Error(ErrorCode::kInconsistentData,
                "window is not an output of mode " + std::to_string(mode.id()),
                fit.residual_norm);
  }

  StateEstimate estimate;
  estimate.initial = fit.x;
  estimate.latest = fit.x;
  for (Index k = 0; k < u_window.cols(); ++k) {
    estimate.latest = mode.a() * estimate.latest + mode.b() * u_window.col(k);
  }
  return estimate;
}

DistortionEngine::DistortionEngine(DistortionConfig config,
                                   std::optional<VectorXd> true_x1,
                                   ToleranceConfig tol)
    : config_(std::move(config)), tol_(tol) {
  config_.Validate();
  tol_.Validate();
  x2bar_ = config_.plan.x2_init;
  x1bar_ = VectorXd::Zero(config_.target_mode.states());
  if (true_x1) {
    RequireSize(*true_x1, config_.true_mode.states(), "initial true state");
    x1bar_ = config_.controller.InitialVirtualState(*true_x1);
    true_state_ = *true_x1;
    primed_ = true;
  }
}

std::optional<EmittedSample> DistortionEngine::Step(
    const std::optional<VectorXd>& u, const Eigen::Ref<const VectorXd>& y,
    const std::optional<VectorXd>& x) {
  const Index horizon = config_.horizon;
  if (k_ > horizon) {
    throw Error(ErrorCode::kHorizonExhausted,
                "step " + std::to_string(k_) + " requested past horizon " +
                    std::to_string(horizon));
  }
  const bool last = k_ == horizon;
  const StateSpaceMode& truth = config_.true_mode;
  const StateSpaceMode& target = config_.target_mode;
  if (!last && !u) {
    ThrowInvalidInput("input u(" + std::to_string(k_) + ") is required");
  }
  if (u && !last) RequireSize(*u, truth.inputs(), "input");
  RequireSize(y, truth.outputs(), "output");
  if (x) RequireSize(*x, truth.states(), "true state");

  // Current true state, if known.
  std::optional<VectorXd> state = x;
  if (!state && true_state_) state = true_state_;

  if (!primed_ && state) {
    x1bar_ = config_.controller.InitialVirtualState(*state);
    primed_ = true;
  }

  std::optional<EmittedSample> emitted;
  if (primed_) {
    if (!state) {
      ThrowInvalidInput("true state x(" + std::to_string(k_) +
                        ") is neither supplied nor reconstructible");
    }
    EmittedSample sample;
    sample.k = k_;
    sample.y = target.c() * x1bar_ + target.c() * x2bar_;
    if (!last) {
      const TrackingController& ctrl = config_.controller;
      const VectorXd u1bar =
          ctrl.r * x1bar_ + ctrl.l * *state + ctrl.s * *u;
      const auto u2bar = config_.plan.u2.col(k_ - 1);
      sample.u = u1bar + u2bar;
      x1bar_ = target.a() * x1bar_ + target.b() * u1bar;
      true_state_ = truth.a() * *state + truth.b() * *u;
    }
    emitted = std::move(sample);
  } else {
    // Reconstruction mode: collect n complete (u, y) pairs, then recover
    // the state after the window.
    y_buffer_.push_back(y);
    if (!last) u_buffer_.push_back(*u);
    const Index n = truth.states();
    if (static_cast<Index>(u_buffer_.size()) == n && !last) {
      MatrixXd u_window(truth.inputs(), n);
      MatrixXd y_window(truth.outputs(), n);
      for (Index i = 0; i < n; ++i) {
        u_window.col(i) = u_buffer_[static_cast<std::size_t>(i)];
        y_window.col(i) = y_buffer_[static_cast<std::size_t>(i)];
      }
      true_state_ =
          ReconstructState(truth, u_window, y_window, tol_).latest;
      u_buffer_.clear();
      y_buffer_.clear();
    }
  }

  if (!last) {
    x2bar_ = target.a() * x2bar_ + target.b() * config_.plan.u2.col(k_ - 1);
  }
  ++k_;
  return emitted;
}

DistortedTrajectory RunOffline(const DistortionConfig& config,
                               const Trajectory& trajectory,
                               const ToleranceConfig& tol) {
  trajectory.Validate();
  const Index horizon = trajectory.horizon();
  if (horizon != config.horizon) {
    ThrowInvalidInput("trajectory horizon " + std::to_string(horizon) +
                      " does not match the configured horizon " +
                      std::to_string(config.horizon));
  }
  if (trajectory.y.rows() != config.true_mode.outputs() ||
      trajectory.u.rows() != config.true_mode.inputs()) {
    ThrowInvalidInput("trajectory dimensions do not match the true mode");
  }
  if (trajectory.x && trajectory.x->rows() != config.true_mode.states()) {
    ThrowInvalidInput("recorded states do not match the true mode");
  }

  std::optional<VectorXd> x1;
  if (trajectory.x) x1 = trajectory.x->col(0);
  DistortionEngine engine(config, x1, tol);

  std::vector<EmittedSample> samples;
  samples.reserve(static_cast<std::size_t>(horizon));
  for (Index k = 0; k < horizon; ++k) {
    std::optional<VectorXd> u;
    if (k + 1 < horizon) u = trajectory.u.col(k);
    std::optional<VectorXd> x;
    if (trajectory.x) x = trajectory.x->col(k);
    if (auto sample = engine.Step(u, trajectory.y.col(k), x)) {
      samples.push_back(std::move(*sample));
    }
  }

  DistortedTrajectory out;
  if (samples.empty()) {
    throw Error(ErrorCode::kInconsistentData,
                "horizon too short to emit any sample after reconstruction");
  }
  out.first_step = samples.front().k;
  const Index count = static_cast<Index>(samples.size());
  const Index first = out.first_step - 1;
  out.u.resize(trajectory.u.rows(), count - 1);
  out.y.resize(trajectory.y.rows(), count);
  for (Index i = 0; i < count; ++i) {
    const EmittedSample& s = samples[static_cast<std::size_t>(i)];
    out.y.col(i) = s.y;
    if (s.u) out.u.col(i) = *s.u;
  }
  out.delta_u = out.u - trajectory.u.middleCols(first, count - 1);
  out.delta_y = out.y - trajectory.y.middleCols(first, count);
  return out;
}

}  // namespace cloak

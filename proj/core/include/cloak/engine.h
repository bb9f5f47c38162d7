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

#ifndef CLOAK_ENGINE_H_
#define CLOAK_ENGINE_H_

#include <deque>
#include <optional>

#include <Eigen/Core>

#include "cloak/invariance.h"
#include "cloak/model.h"
#include "cloak/numerics.h"
#include "cloak/regulation.h"

namespace cloak {

// Everything the streaming distorter needs; bound to one horizon K.
struct DistortionConfig {
  StateSpaceMode true_mode;
  StateSpaceMode target_mode;
  TrackingController controller;
  KernelPlan plan;
  Eigen::Index horizon = 0;

  // Throws kInvalidInput on any shape or binding mismatch.
  void Validate() const;
};

struct StateEstimate {
  Eigen::VectorXd initial;  // state at the first sample of the window
  Eigen::VectorXd latest;   // propagated through every supplied input
};

// Deadbeat reconstruction from a noise-free window of w >= n samples:
// y_window is m x w and u_window is l x (w-1) or l x w. Solves
// Y = O_w x + T_w U by least squares, then propagates x forward with the
// known inputs (w-1 steps, or w steps when the window's last input is
// given). Unobservable components come back at minimum norm.
// Throws kInconsistentData when the data do not fit the mode.
StateEstimate ReconstructState(const StateSpaceMode& mode,
                               const Eigen::Ref<const Eigen::MatrixXd>& u_window,
                               const Eigen::Ref<const Eigen::MatrixXd>& y_window,
                               const ToleranceConfig& tol = {});

struct EmittedSample {
  Eigen::Index k = 0;                 // 1-based step
  std::optional<Eigen::VectorXd> u;   // absent at k = K
  Eigen::VectorXd y;
};

// Sample-by-sample distorter. Keeps the two virtual target states: x1bar
// tracks the true output through the regulator and x2bar replays the
// off-line plan. Single owner; not safe for concurrent Step calls.
class DistortionEngine {
 public:
  // With true_x1 the engine starts primed: x1bar(1) = Pi x1. Without it,
  // output is withheld until the true state has been reconstructed from the
  // first n samples.
  DistortionEngine(DistortionConfig config,
                   std::optional<Eigen::VectorXd> true_x1 = std::nullopt,
                   ToleranceConfig tol = {});

  // Consumes (u(k), y(k), x(k)). u is required for k < K and ignored at
  // k = K. Returns nothing while withholding. Throws kHorizonExhausted after
  // step K.
  std::optional<EmittedSample> Step(
      const std::optional<Eigen::VectorXd>& u,
      const Eigen::Ref<const Eigen::VectorXd>& y,
      const std::optional<Eigen::VectorXd>& x = std::nullopt);

  // Step that will be consumed next (1-based).
  Eigen::Index next_step() const { return k_; }
  bool primed() const { return primed_; }
  const Eigen::VectorXd& x1bar() const { return x1bar_; }
  const Eigen::VectorXd& x2bar() const { return x2bar_; }
  const DistortionConfig& config() const { return config_; }

 private:
  DistortionConfig config_;
  ToleranceConfig tol_;
  Eigen::Index k_ = 1;
  bool primed_ = false;
  Eigen::VectorXd x1bar_;
  Eigen::VectorXd x2bar_;
  // Propagated true state once primed without recorded states.
  std::optional<Eigen::VectorXd> true_state_;
  std::deque<Eigen::VectorXd> u_buffer_;
  std::deque<Eigen::VectorXd> y_buffer_;
};

// Emitted samples from first_step to K. Every delta is relative to the
// matching slice of the input trajectory.
struct DistortedTrajectory {
  Eigen::Index first_step = 1;
  Eigen::MatrixXd u;        // l x (K - first_step)
  Eigen::MatrixXd y;        // m x (K - first_step + 1)
  Eigen::MatrixXd delta_u;
  Eigen::MatrixXd delta_y;

  Trajectory AsTrajectory() const { return Trajectory{u, y, std::nullopt}; }
};

// Folds Step over a recorded trajectory. Uses the recorded states when
// present; otherwise runs in reconstruction mode.
DistortedTrajectory RunOffline(const DistortionConfig& config,
                               const Trajectory& trajectory,
                               const ToleranceConfig& tol = {});

}  // namespace cloak

#endif  // CLOAK_ENGINE_H_

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

#include "cloak/model.h"

#include <algorithm>
#include <set>
#include <string>
#include <utility>

#include "cloak/errors.h"

namespace cloak {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::string Shape(const MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

StateSpaceMode::StateSpaceMode(int id, MatrixXd a, MatrixXd b, MatrixXd c)
    : id_(id), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  const std::string tag = "mode " + std::to_string(id_) + ": ";
  if (a_.rows() == 0 || a_.rows() != a_.cols()) {
    ThrowInvalidInput(tag + "A must be square and non-empty, got " +
                      Shape(a_));
  }
  if (b_.rows() != a_.rows() || b_.cols() == 0) {
    ThrowInvalidInput(tag + "B is " + Shape(b_) + ", expected " +
                      std::to_string(a_.rows()) + "xl with l >= 1");
  }
  if (c_.cols() != a_.rows() || c_.rows() == 0) {
    ThrowInvalidInput(tag + "C is " + Shape(c_) + ", expected mx" +
                      std::to_string(a_.rows()) + " with m >= 1");
  }
  RequireFinite(a_, "A");
  RequireFinite(b_, "B");
  RequireFinite(c_, "C");
}

ModeBank::ModeBank(std::vector<StateSpaceMode> modes)
    : modes_(std::move(modes)) {
  if (modes_.empty()) ThrowInvalidInput("mode bank is empty");
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const StateSpaceMode& mode = modes_[i];
    if (mode.id() != static_cast<int>(i) + 1) {
      ThrowInvalidInput("mode ids must be 1..N in order; position " +
                        std::to_string(i + 1) + " has id " +
                        std::to_string(mode.id()));
    }
    if (mode.outputs() != modes_.front().outputs() ||
        mode.inputs() != modes_.front().inputs()) {
      ThrowInvalidInput("mode " + std::to_string(mode.id()) +
                        " does not share the bank's m and l");
    }
  }
}

bool ModeBank::Contains(int id) const {
  return id >= 1 && id <= static_cast<int>(modes_.size());
}

const StateSpaceMode& ModeBank::Get(int id) const {
  if (!Contains(id)) {
    ThrowInvalidInput("no mode with id " + std::to_string(id));
  }
  return modes_[static_cast<std::size_t>(id - 1)];
}

void Trajectory::Validate() const {
  const Index k = horizon();
  if (k < 2) ThrowInvalidInput("trajectory horizon must be >= 2");
  if (u.cols() != k - 1) {
    ThrowInvalidInput("trajectory has " + std::to_string(u.cols()) +
                      " inputs for horizon " + std::to_string(k) +
                      " (expected K-1)");
  }
  if (x && x->cols() != k) {
    ThrowInvalidInput("trajectory state record has " +
                      std::to_string(x->cols()) + " samples, expected " +
                      std::to_string(k));
  }
  RequireFinite(u, "trajectory inputs");
  RequireFinite(y, "trajectory outputs");
  if (x) RequireFinite(*x, "trajectory states");
}

VectorXd StackedOutputs(const Trajectory& trajectory) {
  return trajectory.y.reshaped();
}

void ContinuousMode::Validate() const {
  if (!(sample_period > 0.0)) ThrowInvalidInput("sample period must be > 0");
  // Constructing a discrete mode performs the same dimension checks.
  StateSpaceMode(0, a, b, c);
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const AssumptionCheck& c) { return c.passed; });
}

const AssumptionCheck* ValidationReport::Find(const std::string& name) const {
  for (const AssumptionCheck& check : checks) {
    if (check.name == name) return &check;
  }
  return nullptr;
}

MatrixXd ObservabilityMatrix(const StateSpaceMode& mode) {
  const Index n = mode.states();
  const Index m = mode.outputs();
  MatrixXd obs(n * m, n);
  MatrixXd block = mode.c();
  for (Index i = 0; i < n; ++i) {
    obs.middleRows(i * m, m) = block;
    block = block * mode.a();
  }
  return obs;
}

MatrixXd ControllabilityMatrix(const StateSpaceMode& mode) {
  const Index n = mode.states();
  const Index l = mode.inputs();
  MatrixXd ctrb(n, n * l);
  MatrixXd block = mode.b();
  for (Index i = 0; i < n; ++i) {
    ctrb.middleCols(i * l, l) = block;
    block = mode.a() * block;
  }
  return ctrb;
}

ValidationReport ValidateMode(const StateSpaceMode& mode,
                              const ToleranceConfig& tol) {
  tol.Validate();
  ValidationReport report;
  report.mode_id = mode.id();
  auto add = [&](const char* name, Index rank, Index required) {
    report.checks.push_back({name, rank, required, rank == required});
  };
  add(kObservableCheck, NumericalRank(ObservabilityMatrix(mode), tol),
      mode.states());
  add(kControllableCheck, NumericalRank(ControllabilityMatrix(mode), tol),
      mode.states());
  add(kOutputFullRankCheck, NumericalRank(mode.c(), tol), mode.outputs());
  add(kInputInjectiveCheck, NumericalRank(mode.b(), tol), mode.inputs());
  return report;
}

StateSpaceMode DiscretizeZoh(const ContinuousMode& mode, int id) {
  mode.Validate();
  const Index n = mode.a.rows();
  const Index l = mode.b.cols();
  MatrixXd augmented = MatrixXd::Zero(n + l, n + l);
  augmented.topLeftCorner(n, n) = mode.a;
  augmented.topRightCorner(n, l) = mode.b;
  const MatrixXd phi = MatrixExponential(augmented * mode.sample_period);
  return StateSpaceMode(id, phi.topLeftCorner(n, n), phi.topRightCorner(n, l),
                        mode.c);
}

ContinuousMode LongitudinalVehicle(double tau, double beta,
                                   double sample_period) {
  if (!(tau > 0.0)) ThrowInvalidInput("vehicle lag tau must be > 0");
  ContinuousMode mode;
  mode.a = MatrixXd::Zero(3, 3);
  mode.a(0, 1) = 1.0;
  mode.a(1, 2) = 1.0;
  mode.a(2, 2) = -1.0 / tau;
  mode.b = MatrixXd::Zero(3, 1);
  mode.b(2, 0) = beta / tau;
  mode.c = MatrixXd::Zero(1, 3);
  mode.c(0, 2) = 1.0;
  mode.sample_period = sample_period;
  return mode;
}

Trajectory SimulateMode(const StateSpaceMode& mode,
                        const Eigen::Ref<const VectorXd>& x1,
                        const Eigen::Ref<const MatrixXd>& u) {
  if (x1.size() != mode.states()) {
    ThrowInvalidInput("initial state has size " + std::to_string(x1.size()) +
                      ", mode has " + std::to_string(mode.states()) +
                      " states");
  }
  if (u.rows() != mode.inputs()) {
    ThrowInvalidInput("input sequence has " + std::to_string(u.rows()) +
                      " channels, mode has " + std::to_string(mode.inputs()));
  }
  const Index horizon = u.cols() + 1;
  Trajectory out;
  out.u = u;
  out.y.resize(mode.outputs(), horizon);
  MatrixXd states(mode.states(), horizon);
  states.col(0) = x1;
  for (Index k = 0; k + 1 < horizon; ++k) {
    states.col(k + 1).noalias() = mode.a() * states.col(k);
    states.col(k + 1).noalias() += mode.b() * u.col(k);
  }
  out.y.noalias() = mode.c() * states;
  out.x = std::move(states);
  return out;
}

}  // namespace cloak

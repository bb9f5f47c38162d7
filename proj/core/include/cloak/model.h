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

#ifndef CLOAK_MODEL_H_
#define CLOAK_MODEL_H_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cloak/numerics.h"

namespace cloak {

// One operation mode x(k+1) = A x(k) + B u(k), y(k) = C x(k).
// Immutable after construction; dimensions are checked by the constructor.
class StateSpaceMode {
 public:
  StateSpaceMode(int id, Eigen::MatrixXd a, Eigen::MatrixXd b,
                 Eigen::MatrixXd c);

  int id() const { return id_; }
  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::MatrixXd& b() const { return b_; }
  const Eigen::MatrixXd& c() const { return c_; }

  Eigen::Index states() const { return a_.rows(); }
  Eigen::Index outputs() const { return c_.rows(); }
  Eigen::Index inputs() const { return b_.cols(); }

 private:
  int id_;
  Eigen::MatrixXd a_;
  Eigen::MatrixXd b_;
  Eigen::MatrixXd c_;
};

// Modes sharing output and input dimensions, with ids 1..N in order.
class ModeBank {
 public:
  explicit ModeBank(std::vector<StateSpaceMode> modes);

  const std::vector<StateSpaceMode>& modes() const { return modes_; }
  std::size_t size() const { return modes_.size(); }
  Eigen::Index outputs() const { return modes_.front().outputs(); }
  Eigen::Index inputs() const { return modes_.front().inputs(); }

  // Throws kInvalidInput for an unknown id.
  const StateSpaceMode& Get(int id) const;
  bool Contains(int id) const;

 private:
  std::vector<StateSpaceMode> modes_;
};

// Input-output record over a horizon K. Samples are stored column-wise:
// u is l x (K-1), y is m x K and the optional states x are n x K. The
// column-major storage of y is exactly the stacked vector col[y(1),...,y(K)].
struct Trajectory {
  Eigen::MatrixXd u;
  Eigen::MatrixXd y;
  std::optional<Eigen::MatrixXd> x;

  Eigen::Index horizon() const { return y.cols(); }
  bool has_states() const { return x.has_value(); }

  // Throws kInvalidInput unless K >= 2, u has K-1 columns and x (if
  // present) has K columns.
  void Validate() const;
};

// Stacked output vector col[y(1), ..., y(K)].
Eigen::VectorXd StackedOutputs(const Trajectory& trajectory);

struct ContinuousMode {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::MatrixXd c;
  double sample_period = 0.0;

  void Validate() const;
};

struct AssumptionCheck {
  std::string name;
  Eigen::Index rank = 0;
  Eigen::Index required = 0;
  bool passed = false;
};

struct ValidationReport {
  int mode_id = 0;
  std::vector<AssumptionCheck> checks;

  bool passed() const;
  const AssumptionCheck* Find(const std::string& name) const;
};

inline constexpr char kObservableCheck[] = "observable";
inline constexpr char kControllableCheck[] = "controllable";
inline constexpr char kOutputFullRankCheck[] = "output_full_row_rank";
inline constexpr char kInputInjectiveCheck[] = "input_trivial_kernel";

Eigen::MatrixXd ObservabilityMatrix(const StateSpaceMode& mode);
Eigen::MatrixXd ControllabilityMatrix(const StateSpaceMode& mode);

// Checks the standing assumptions: (A, C) observable, (A, B) controllable,
// C of full row rank and B of full column rank. Failures are reported per
// check, never thrown.
ValidationReport ValidateMode(const StateSpaceMode& mode,
                              const ToleranceConfig& tol = {});

// Exact zero-order-hold discretization through the exponential of the
// augmented matrix [[A, B], [0, 0]] * h.
StateSpaceMode DiscretizeZoh(const ContinuousMode& mode, int id);

// Longitudinal vehicle with states (position, velocity, acceleration),
// power-train lag tau, engine coefficient beta and acceleration output.
ContinuousMode LongitudinalVehicle(double tau, double beta,
                                   double sample_period);

// Runs the mode recursion from x1 under u (l x (K-1)), recording states.
Trajectory SimulateMode(const StateSpaceMode& mode,
                        const Eigen::Ref<const Eigen::VectorXd>& x1,
                        const Eigen::Ref<const Eigen::MatrixXd>& u);

}  // namespace cloak

#endif  // CLOAK_MODEL_H_

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
#include <random>

#include <gtest/gtest.h>

#include "cloak/errors.h"
#include "support/random_systems.h"

namespace cloak {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Trajectory RandomData(Eigen::Index m, Eigen::Index l, Eigen::Index horizon,
                      std::mt19937_64& rng) {
  return {testing::RandomMatrix(l, horizon - 1, rng),
          testing::RandomMatrix(m, horizon, rng), std::nullopt};
}

TEST(FitBehaviour, ClosedFormScalarProjection) {
  MatrixXd y(1, 3);
  y << 1.0, 0.5, 0.25;
  const Trajectory traj{MatrixXd::Zero(1, 2), y, std::nullopt};
  const BehaviourFit fit = FitBehaviour(testing::Scalar(1, 0.8, 1, 1), traj);
  // x = <basis, Y> / ||basis||^2 with basis (1, 0.8, 0.64).
  const double dot = 1.0 + 0.4 + 0.16;
  const double basis_sq = 1.0 + 0.64 + 0.4096;
  const double expected_sq = 1.3125 - dot * dot / basis_sq;
  EXPECT_NEAR(fit.x1(0), dot / basis_sq, 1e-14);
  EXPECT_NEAR(fit.absolute * fit.absolute, expected_sq, 1e-14);
  EXPECT_NEAR(fit.absolute * fit.absolute, 0.1252, 1e-4);
  EXPECT_NEAR(fit.normalized, fit.absolute / (1.0 + std::sqrt(1.3125)), 1e-15);
}

TEST(FitBehaviour, OwnTrajectoriesFitExactly) {
  std::mt19937_64 rng(179);
  for (int trial = 0; trial < 100; ++trial) {
    const int l = testing::UniformInt(1, 2, rng);
    const StateSpaceMode mode = testing::RandomMode(
        1, testing::UniformInt(1, 4, rng), testing::UniformInt(1, 2, rng), l,
        rng);
    const Eigen::Index horizon = testing::UniformInt(2, 50, rng);
    const Trajectory traj =
        SimulateMode(mode, testing::RandomMatrix(mode.states(), 1, rng),
                     testing::UniformInputs(l, horizon - 1, rng));
    EXPECT_LE(ModeResidual(mode, traj), 1e-10) << "trial " << trial;
  }
}

TEST(FitBehaviour, DimensionMismatchIsRejected) {
  std::mt19937_64 rng(181);
  const Trajectory traj = RandomData(2, 1, 5, rng);
  EXPECT_THROW(ModeResidual(testing::Scalar(1, 0.5, 1, 1), traj), Error);
}

TEST(FitBehaviour, SimilarityInvariance) {
  std::mt19937_64 rng(191);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = testing::UniformInt(1, 4, rng);
    const int m = testing::UniformInt(1, 2, rng);
    const int l = testing::UniformInt(1, 2, rng);
    const StateSpaceMode mode = testing::RandomMode(1, n, m, l, rng);
    const StateSpaceMode moved =
        testing::Transformed(mode, testing::RandomInvertible(n, rng));
    const Trajectory traj =
        RandomData(m, l, testing::UniformInt(2, 30, rng), rng);
    const double base = ModeResidual(mode, traj);
    EXPECT_NEAR(ModeResidual(moved, traj), base, 1e-8 * (1.0 + base))
        << "trial " << trial;
  }
}

TEST(Classify, ZeroTrajectoryIsAmbiguous) {
  const ModeBank bank({testing::Scalar(1, 0.5, 1, 1),
                       testing::Scalar(2, 0.8, 1, 1)});
  const Trajectory zero{MatrixXd::Zero(1, 9), MatrixXd::Zero(1, 10),
                        std::nullopt};
  const ClassificationReport report = Classify(bank, zero);
  EXPECT_EQ(report.verdict, ClassificationReport::Verdict::kAmbiguous);
  EXPECT_EQ(report.VerdictLabel(), "AMBIGUOUS");
  EXPECT_EQ(report.accepted, (std::vector<int>{1, 2}));
}

TEST(Classify, UniqueAndNoneVerdicts) {
  std::mt19937_64 rng(193);
  const ModeBank bank({testing::Scalar(1, 0.5, 1, 1),
                       testing::Scalar(2, 0.8, 1, 1)});
  const Trajectory own = SimulateMode(bank.Get(2), VectorXd::Ones(1),
                                      testing::UniformInputs(1, 19, rng));
  const ClassificationReport report = Classify(bank, own);
  EXPECT_EQ(report.verdict, ClassificationReport::Verdict::kUnique);
  EXPECT_EQ(report.mode_id, 2);
  EXPECT_EQ(report.VerdictLabel(), "2");
  EXPECT_GT(report.residuals.at(1), kDefaultAcceptTol);

  const ClassificationReport none = Classify(bank, RandomData(1, 1, 20, rng));
  EXPECT_EQ(none.verdict, ClassificationReport::Verdict::kNone);
  EXPECT_EQ(none.VerdictLabel(), "NONE");
  EXPECT_TRUE(none.accepted.empty());
}

TEST(Classify, AcceptedSetMatchesTolerance) {
  std::mt19937_64 rng(197);
  const ModeBank bank({testing::Scalar(1, 0.5, 1, 1),
                       testing::Scalar(2, 0.8, 1, 1),
                       testing::Scalar(3, -0.4, 2, 1)});
  for (int trial = 0; trial < 20; ++trial) {
    const Trajectory traj = RandomData(1, 1, 6, rng);
    const double tol = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    const ClassificationReport report = Classify(bank, traj, tol);
    std::vector<int> expected;
    for (const auto& [id, residual] : report.residuals) {
      if (residual <= tol) expected.push_back(id);
    }
    EXPECT_EQ(report.accepted, expected);
  }
}

TEST(Classify, RejectsNegativeTolerance) {
  const ModeBank bank({testing::Scalar(1, 0.5, 1, 1)});
  const Trajectory zero{MatrixXd::Zero(1, 1), MatrixXd::Zero(1, 2),
                        std::nullopt};
  EXPECT_THROW(Classify(bank, zero, -1.0), Error);
}

}  // namespace
}  // namespace cloak

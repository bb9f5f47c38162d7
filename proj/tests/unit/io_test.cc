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

#include "cloak/io.h"

#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "cloak/errors.h"
#include "support/random_systems.h"

namespace cloak {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr char kBank[] = R"({
  "m": 1, "l": 1,
  "modes": [
    {"id": 1, "A": [[0.5]], "B": [[1]], "C": [[1]]},
    {"id": 2, "A": [[1, 0.1], [0, 1]], "B": [[0], [0.1]], "C": [[1, 0]]}
  ]
})";

TEST(ModeBankJson, ParsesRowMajorMatrices) {
  const ModeBank bank = io::ParseModeBank(kBank);
  ASSERT_EQ(bank.size(), 2u);
  EXPECT_EQ(bank.Get(2).a()(0, 1), 0.1);
  EXPECT_EQ(bank.Get(2).a()(1, 0), 0.0);
  EXPECT_EQ(bank.Get(2).b()(1, 0), 0.1);
}

TEST(ModeBankJson, RoundTripIsExact) {
  std::mt19937_64 rng(199);
  const ModeBank bank({testing::RandomMode(1, 3, 2, 1, rng),
                       testing::RandomMode(2, 2, 2, 1, rng)});
  const ModeBank back = io::ParseModeBank(io::ModeBankToJson(bank));
  for (int id : {1, 2}) {
    EXPECT_EQ(back.Get(id).a(), bank.Get(id).a());
    EXPECT_EQ(back.Get(id).b(), bank.Get(id).b());
    EXPECT_EQ(back.Get(id).c(), bank.Get(id).c());
  }
}

TEST(ModeBankJson, RejectsMalformedDocuments) {
  EXPECT_THROW(io::ParseModeBank("{"), Error);
  EXPECT_THROW(io::ParseModeBank(R"({"m": 1, "l": 1})"), Error);
  EXPECT_THROW(io::ParseModeBank(R"({"m": 2, "l": 1, "modes": [
      {"id": 1, "A": [[0.5]], "B": [[1]], "C": [[1]]}]})"),
               Error);
  EXPECT_THROW(io::ParseModeBank(R"({"m": 1, "l": 1, "modes": [
      {"id": 1, "A": [[0.5, 1]], "B": [[1]], "C": [[1]]}]})"),
               Error);
  EXPECT_THROW(io::ParseModeBank(R"({"m": 1, "l": 1, "modes": [
      {"id": 1, "A": [["x"]], "B": [[1]], "C": [[1]]}]})"),
               Error);
}

TEST(ModeBankJson, MissingFileIsInvalidInput) {
  try {
    io::LoadModeBank("/nonexistent/bank.json");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
}

TEST(TrajectoryCsv, ParsesHeaderAndEmptyLastInput) {
  const Trajectory traj = io::ParseTrajectoryCsv(
      "k,u_1,y_1,x_1\n1,0.5,1,1\n2,-1,2.5,2\n3,,3,4\n");
  EXPECT_EQ(traj.horizon(), 3);
  EXPECT_EQ(traj.u(0, 1), -1.0);
  EXPECT_EQ(traj.y(0, 2), 3.0);
  ASSERT_TRUE(traj.has_states());
  EXPECT_EQ((*traj.x)(0, 2), 4.0);
}

TEST(TrajectoryCsv, RoundTripIsExact) {
  std::mt19937_64 rng(211);
  const StateSpaceMode mode = testing::RandomMode(1, 3, 2, 2, rng);
  const Trajectory traj =
      SimulateMode(mode, testing::RandomMatrix(3, 1, rng),
                   testing::RandomMatrix(2, 9, rng) * 1e-3);
  const Trajectory back = io::ParseTrajectoryCsv(io::TrajectoryToCsv(traj));
  EXPECT_EQ(back.u, traj.u);
  EXPECT_EQ(back.y, traj.y);
  ASSERT_TRUE(back.has_states());
  EXPECT_EQ(*back.x, *traj.x);
}

TEST(TrajectoryCsv, FirstStepOffset) {
  const Trajectory traj{MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 2),
                        std::nullopt};
  const std::string csv = io::TrajectoryToCsv(traj, 4);
  EXPECT_NE(csv.find("\n4,"), std::string::npos);
  EXPECT_NE(csv.find("\n5,,"), std::string::npos);
  EXPECT_EQ(io::ParseTrajectoryCsv(csv).horizon(), 2);
}

TEST(TrajectoryCsv, RejectsMalformedFiles) {
  EXPECT_THROW(io::ParseTrajectoryCsv(""), Error);
  EXPECT_THROW(io::ParseTrajectoryCsv("t,u_1,y_1\n1,0,0\n2,,0\n"), Error);
  EXPECT_THROW(io::ParseTrajectoryCsv("k,u_1,y_1\n1,0,0\n"), Error);
  EXPECT_THROW(io::ParseTrajectoryCsv("k,u_1,y_1\n1,0,0\n3,,0\n"), Error);
  EXPECT_THROW(io::ParseTrajectoryCsv("k,u_1,y_1\n1,0,0\n2,1,0\n"), Error);
  EXPECT_THROW(io::ParseTrajectoryCsv("k,u_1,y_1\n1,abc,0\n2,,0\n"), Error);
  EXPECT_THROW(io::ParseTrajectoryCsv("k,u_1,y_1\n1,0\n2,,0\n"), Error);
}

TEST(UtilitySpecJson, AverageShorthand) {
  const UtilitySpec spec =
      io::ParseUtilitySpec(R"({"kind": "average", "K": 5, "m": 2})");
  EXPECT_EQ(spec.horizon(), 5);
  EXPECT_EQ(spec.outputs(), 2);
  EXPECT_EQ(spec.f().rows(), 2);
}

TEST(UtilitySpecJson, ExplicitMatrix) {
  const UtilitySpec spec = io::ParseUtilitySpec(
      R"({"K": 2, "q": 1, "F": [[0.5, 0.5]], "mu": [1.0]})");
  EXPECT_EQ(spec.f()(0, 1), 0.5);
  EXPECT_EQ(spec.mu()(0), 1.0);
  EXPECT_THROW(io::ParseUtilitySpec(
                   R"({"K": 2, "q": 2, "F": [[0.5, 0.5]], "mu": [1.0]})"),
               Error);
  EXPECT_THROW(io::ParseUtilitySpec(R"({"kind": "median", "K": 2, "m": 1})"),
               Error);
}

TEST(KernelPlanJson, RoundTripRecomputesOutputs) {
  const StateSpaceMode mode = testing::Scalar(2, 0.8, 1, 1);
  const UtilitySpec spec = UtilitySpec::Average(12, 1);
  const KernelPlan plan = SolveUtilityInvariance(mode, spec, 2.5, 77);
  const KernelPlan back =
      io::ParseKernelPlan(io::KernelPlanToJson(plan), mode, spec);
  EXPECT_EQ(back.x2_init, plan.x2_init);
  EXPECT_EQ(back.u2, plan.u2);
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(back.magnitude, 2.5);
  EXPECT_LE((back.delta_y - plan.delta_y).norm(), 1e-12);
}

TEST(KernelPlanJson, RejectsWrongTargetOrHorizon) {
  const StateSpaceMode mode = testing::Scalar(2, 0.8, 1, 1);
  const UtilitySpec spec = UtilitySpec::Average(6, 1);
  const std::string text =
      io::KernelPlanToJson(SolveUtilityInvariance(mode, spec, 1.0, 1));
  EXPECT_THROW(io::ParseKernelPlan(text, testing::Scalar(1, 0.8, 1, 1), spec),
               Error);
  EXPECT_THROW(io::ParseKernelPlan(text, mode, UtilitySpec::Average(7, 1)),
               Error);
}

TEST(ControllerJson, RoundTripIsExact) {
  std::mt19937_64 rng(223);
  io::StoredController stored;
  stored.true_mode_id = 1;
  stored.target_mode_id = 3;
  stored.controller.r = testing::RandomMatrix(1, 3, rng);
  stored.controller.l = testing::RandomMatrix(1, 2, rng);
  stored.controller.s = testing::RandomMatrix(1, 1, rng);
  stored.controller.pi = testing::RandomMatrix(3, 2, rng);
  const io::StoredController back =
      io::ParseController(io::ControllerToJson(stored));
  EXPECT_EQ(back.true_mode_id, 1);
  EXPECT_EQ(back.target_mode_id, 3);
  EXPECT_EQ(back.controller.r, stored.controller.r);
  EXPECT_EQ(back.controller.l, stored.controller.l);
  EXPECT_EQ(back.controller.s, stored.controller.s);
  EXPECT_EQ(back.controller.pi, stored.controller.pi);
}

TEST(ReportJson, ClassificationFields) {
  ClassificationReport report;
  report.residuals = {{1, 0.0}, {2, 0.5}};
  report.accepted = {1};
  report.verdict = ClassificationReport::Verdict::kUnique;
  report.mode_id = 1;
  const std::string text = io::ClassificationReportToJson(report);
  EXPECT_NE(text.find("\"verdict\": \"1\""), std::string::npos);
  EXPECT_NE(text.find("\"accepted\""), std::string::npos);
  EXPECT_NE(text.find("\"residuals\""), std::string::npos);
}

TEST(ReportJson, ValidationNamesFailedChecks) {
  MatrixXd b(2, 1);
  b << 1, 0;
  MatrixXd c(1, 2);
  c << 1, 0;
  const StateSpaceMode mode(1, MatrixXd::Identity(2, 2), b, c);
  const std::string text = io::ValidationReportsToJson({ValidateMode(mode)});
  EXPECT_NE(text.find("\"passed\": false"), std::string::npos);
  EXPECT_NE(text.find(kObservableCheck), std::string::npos);
}

TEST(Files, WriteThenRead) {
  const std::filesystem::path path =
      std::filesystem::path(::testing::TempDir()) / "cloak_io_roundtrip.txt";
  io::WriteFile(path, "hello\n");
  EXPECT_EQ(io::ReadFile(path), "hello\n");
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace cloak

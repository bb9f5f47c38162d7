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

// One line per acceptance criterion; nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cloak/adversary.h"
#include "cloak/engine.h"
#include "cloak/errors.h"
#include "cloak/invariance.h"
#include "cloak/model.h"
#include "cloak/numerics.h"
#include "cloak/regulation.h"
#include "commands.h"
#include "support/random_systems.h"

namespace {

using cloak::ClassificationReport;
using cloak::StateSpaceMode;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace testing = cloak::testing;

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct DemoFigures {
  double regulation_error = 0.0;
  double regulation_bound = 0.0;
  double mean_gap = 0.0;
  double mean_bound = 0.0;
  double distortion = 0.0;
  double original_true = 0.0;
  double original_target = 0.0;
  double distorted_target = 0.0;
  ClassificationReport original_report;
  ClassificationReport distorted_report;
};

DemoFigures Measure(Eigen::Index horizon) {
  const cloak::cli::DemoRun run = cloak::cli::RunVehicleDemo(horizon, 1.0, 1);
  DemoFigures f;
  f.regulation_error = run.regulation.max_output_error;
  f.regulation_bound = 1e-6 * (1.0 + run.original.y.cwiseAbs().maxCoeff());
  const double mean = run.original.y.mean();
  f.mean_gap = std::abs(run.distorted.y.mean() - mean);
  f.mean_bound = 1e-8 * (1.0 + std::abs(mean));
  f.distortion = run.distorted.delta_y.norm();
  f.original_report = cloak::Classify(run.bank, run.original);
  f.distorted_report =
      cloak::Classify(run.bank, run.distorted.AsTrajectory());
  f.original_true = f.original_report.residuals.at(1);
  f.original_target = f.original_report.residuals.at(2);
  f.distorted_target = f.distorted_report.residuals.at(2);
  return f;
}

bool RegulationHolds(const DemoFigures& f) {
  return f.regulation_error <= f.regulation_bound;
}

bool InvarianceHolds(const DemoFigures& f) {
  return f.mean_gap <= f.mean_bound && std::abs(f.distortion - 1.0) <= 1e-6;
}

bool ClassificationHolds(const DemoFigures& f) {
  return f.original_true <= 1e-6 && f.original_target >= 1e-3 &&
         f.distorted_target <= 1e-6;
}

std::string Format(const char* fmt, double a, double b = 0.0,
                   double c = 0.0) {
  char buffer[256];
  std::snprintf(buffer, sizeof(buffer), fmt, a, b, c);
  return buffer;
}

Outcome Discretization() {
  const StateSpaceMode m1 =
      cloak::DiscretizeZoh(cloak::LongitudinalVehicle(0.01, 1.5, 0.1), 1);
  const StateSpaceMode m2 =
      cloak::DiscretizeZoh(cloak::LongitudinalVehicle(0.6, 0.7, 0.1), 2);
  MatrixXd ab1(3, 4);
  ab1 << 1, 0.1, 0.0009000, 0.0061499,  //
      0, 1.0, 0.0099995, 0.1350010,     //
      0, 0.0, 0.0000453, 1.4999300;
  MatrixXd ab2(3, 4);
  ab2 << 1, 0.1, 0.0047334, 0.0001866,  //
      0, 1.0, 0.0921110, 0.0055223,     //
      0, 0.0, 0.8464820, 0.1074630;
  MatrixXd got1(3, 4);
  got1 << m1.a(), m1.b();
  MatrixXd got2(3, 4);
  got2 << m2.a(), m2.b();
  const double err = std::max((got1 - ab1).cwiseAbs().maxCoeff(),
                              (got2 - ab2).cwiseAbs().maxCoeff());
  return {err <= 5e-5, Format("max entry error %.2e (bound 5e-5)", err)};
}

Outcome Regulator() {
  const cloak::ModeBank bank = cloak::cli::VehicleBank();
  MatrixXd pi(3, 3);
  pi << 1, -0.038, 0.001, 0, 1, -0.038, 0, 0, 1;
  MatrixXd gamma(1, 3);
  gamma << 0, 0, -7.876;
  const double printed = cloak::RegulatorResidual(
      bank.Get(1), bank.Get(2), pi, gamma, MatrixXd::Constant(1, 1, 13.95));
  const cloak::RegulatorSolution sol =
      cloak::SolveRegulatorEquations(bank.Get(1), bank.Get(2));
  return {printed <= 1e-2 && sol.residual <= 1e-9,
          Format("printed triple residual %.2e, solver residual %.2e, "
                 "Theta %.6f",
                 printed, sol.residual, sol.theta(0, 0))};
}

Outcome Spectrum() {
  const StateSpaceMode target = cloak::cli::VehicleBank().Get(2);
  const Eigen::VectorXcd lambda = cloak::Eigenvalues(
      target.a() + target.b() * cloak::cli::VehicleGain());
  std::vector<std::complex<double>> sorted(lambda.data(),
                                           lambda.data() + lambda.size());
  std::sort(sorted.begin(), sorted.end(),
            [](auto x, auto y) { return x.real() < y.real(); });
  const double wanted[] = {0.1, 0.2, 0.3};
  double err = 0.0;
  for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(sorted[i] - wanted[i]));
  return {err <= 1e-2,
          Format("eigenvalues %.5f %.5f %.5f", sorted[0].real(),
                 sorted[1].real(), sorted[2].real()) +
              Format(", max deviation %.2e", err)};
}

Outcome Equivalence() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int m = testing::UniformInt(1, 2, rng);
    const int n = testing::UniformInt(m, 3, rng);
    const int l = m;
    const int horizon = testing::UniformInt(2, 8, rng);
    const StateSpaceMode mode = testing::RandomMode(2, n, m, l, rng);
    const int q = testing::UniformInt(1, horizon * m - 1, rng);
    const cloak::UtilitySpec spec(testing::RandomMatrix(q, horizon * m, rng),
                                  VectorXd::Zero(q), horizon);
    const MatrixXd basis = cloak::InvarianceNullspace(
        cloak::BuildLiftedOperators(mode, horizon), spec);
    VectorXd w;
    try {
      w = cloak::StackPlan(
          cloak::SolveUtilityInvariance(mode, spec, 1.0, 7000 + trial));
    } catch (const cloak::Error& e) {
      return {false, std::string("instance raised: ") + e.what()};
    }
    worst = std::max(
        worst, (w - basis * (basis.transpose() * w)).norm() / w.norm());
  }
  return {worst <= 1e-8,
          Format("20 instances, worst projection residual %.2e", worst)};
}

// Each property returns the number of failing cases out of 100.
int PenroseFailures() {
  std::mt19937_64 rng(1);
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    const int r = testing::UniformInt(1, 7, rng);
    const int c = testing::UniformInt(1, 7, rng);
    const MatrixXd m = testing::RandomRankMatrix(
        r, c, testing::UniformInt(0, std::min(r, c), rng), rng);
    const MatrixXd p = cloak::PseudoInverse(m);
    const double scale = 1e-9 * (1.0 + m.norm() * p.norm());
    if ((m * p * m - m).norm() > scale * (1.0 + m.norm()) ||
        (p * m * p - p).norm() > scale * (1.0 + p.norm())) {
      ++failures;
    }
  }
  return failures;
}

int NullspaceFailures() {
  std::mt19937_64 rng(2);
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    const int r = testing::UniformInt(1, 6, rng);
    const int c = testing::UniformInt(1, 8, rng);
    const MatrixXd m = testing::RandomRankMatrix(
        r, c, testing::UniformInt(0, std::min(r, c), rng), rng);
    const MatrixXd b = cloak::NullspaceBasis(m);
    if (b.cols() == 0) continue;
    const double orth =
        (b.transpose() * b - MatrixXd::Identity(b.cols(), b.cols())).norm();
    if ((m * b).norm() > 1e-9 * (1.0 + m.norm()) || orth > 1e-12) ++failures;
  }
  return failures;
}

struct Pair {
  StateSpaceMode truth;
  StateSpaceMode target;
  cloak::TrackingController controller;
};

Pair RandomPair(std::mt19937_64& rng) {
  const int n = testing::UniformInt(1, 4, rng);
  const int m = testing::UniformInt(1, 2, rng);
  const int l = testing::UniformInt(m, 2, rng);
  const StateSpaceMode truth = testing::RandomMode(1, n, m, l, rng);
  const StateSpaceMode target = testing::Transformed(
      StateSpaceMode(2, truth.a(), truth.b(), truth.c()),
      testing::RandomInvertible(n, rng));
  return {truth, target,
          cloak::BuildTrackingController(
              cloak::SolveRegulatorEquations(truth, target),
              cloak::DesignStabilizingGain(target), target)};
}

cloak::DistortedTrajectory Replay(const Pair& p, const cloak::KernelPlan& plan,
                                  const cloak::Trajectory& traj) {
  return cloak::RunOffline(
      {p.truth, p.target, p.controller, plan, plan.horizon()}, traj);
}

int SuperpositionFailures() {
  std::mt19937_64 rng(3);
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    const Pair p = RandomPair(rng);
    const Eigen::Index horizon = testing::UniformInt(2, 40, rng);
    const cloak::KernelPlan plan = cloak::SolveUtilityInvariance(
        p.target, cloak::UtilitySpec::Average(horizon, p.truth.outputs()),
        1.0, i);
    const cloak::Trajectory traj = cloak::SimulateMode(
        p.truth, testing::RandomMatrix(p.truth.states(), 1, rng),
        testing::UniformInputs(p.truth.inputs(), horizon - 1, rng));
    const VectorXd diff =
        (Replay(p, plan, traj).y -
         Replay(p, cloak::ZeroPlan(p.target, horizon), traj).y)
            .reshaped();
    const VectorXd expected =
        cloak::LiftedResponse(p.target, plan.x2_init, plan.u2);
    if ((diff - expected).norm() >
        1e-12 * (1.0 + traj.y.norm() + expected.norm())) {
      ++failures;
    }
  }
  return failures;
}

int DeterminismFailures() {
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    cloak::DistortedTrajectory runs[2];
    for (auto& run : runs) {
      std::mt19937_64 rng(4000 + i);
      const Pair p = RandomPair(rng);
      const Eigen::Index horizon = testing::UniformInt(2, 30, rng);
      const cloak::KernelPlan plan = cloak::SolveUtilityInvariance(
          p.target, cloak::UtilitySpec::Average(horizon, p.truth.outputs()),
          1.0, i);
      run = Replay(p, plan,
                   cloak::SimulateMode(
                       p.truth, testing::RandomMatrix(p.truth.states(), 1, rng),
                       testing::UniformInputs(p.truth.inputs(), horizon - 1,
                                              rng)));
    }
    if (runs[0].y != runs[1].y || runs[0].u != runs[1].u) ++failures;
  }
  return failures;
}

int SimilarityFailures() {
  std::mt19937_64 rng(5);
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    const int n = testing::UniformInt(1, 4, rng);
    const int m = testing::UniformInt(1, 2, rng);
    const int l = testing::UniformInt(1, 2, rng);
    const StateSpaceMode mode = testing::RandomMode(1, n, m, l, rng);
    const StateSpaceMode moved =
        testing::Transformed(mode, testing::RandomInvertible(n, rng));
    const Eigen::Index horizon = testing::UniformInt(2, 30, rng);
    const cloak::Trajectory traj{testing::RandomMatrix(l, horizon - 1, rng),
                                 testing::RandomMatrix(m, horizon, rng),
                                 std::nullopt};
    const double a = cloak::ModeResidual(mode, traj);
    const double b = cloak::ModeResidual(moved, traj);
    if (std::abs(a - b) > 1e-8 * (1.0 + a)) ++failures;
  }
  return failures;
}

Outcome Properties() {
  const std::pair<const char*, std::function<int()>> suites[] = {
      {"penrose", PenroseFailures},
      {"nullspace", NullspaceFailures},
      {"superposition", SuperpositionFailures},
      {"determinism", DeterminismFailures},
      {"similarity", SimilarityFailures},
  };
  Outcome outcome{true, ""};
  for (const auto& [name, run] : suites) {
    const int failures = run();
    outcome.passed = outcome.passed && failures == 0;
    if (!outcome.detail.empty()) outcome.detail += ", ";
    outcome.detail += std::string(name) + " " + std::to_string(failures) +
                      "/100 failed";
  }
  return outcome;
}

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const Outcome& outcome,
                    double seconds) {
    std::printf("[%s] %d %s: %s (%.3f s)\n", outcome.passed ? "PASS" : "FAIL",
                id, name, outcome.detail.c_str(), seconds);
    if (!outcome.passed) ++failed;
  };
  auto guarded = [](const std::function<Outcome()>& body) {
    try {
      return body();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("raised: ") + e.what()};
    }
  };

  auto start = Clock::now();
  Outcome o = guarded(Discretization);
  report(1, "discretization fidelity", o, Seconds(start));

  start = Clock::now();
  o = guarded(Regulator);
  report(2, "regulator equations", o, Seconds(start));

  start = Clock::now();
  o = guarded(Spectrum);
  report(3, "closed-loop spectrum", o, Seconds(start));

  DemoFigures desk;
  start = Clock::now();
  o = guarded([&] {
    desk = Measure(500);
    return Outcome{RegulationHolds(desk),
                   Format("K=500 max |ybar1 - y| %.2e (bound %.2e)",
                          desk.regulation_error, desk.regulation_bound)};
  });
  const double desk_seconds = Seconds(start);
  report(4, "exact regulation", o, desk_seconds);

  o = guarded([&] {
    return Outcome{InvarianceHolds(desk),
                   Format("mean gap %.2e (bound %.2e), |Ybar - Y| = %.12f",
                          desk.mean_gap, desk.mean_bound, desk.distortion)};
  });
  report(5, "utility invariance", o, desk_seconds);

  o = guarded([&] {
    return Outcome{
        ClassificationHolds(desk),
        Format("original: mode1 %.2e mode2 %.2e; distorted: mode2 %.2e",
               desk.original_true, desk.original_target,
               desk.distorted_target) +
            " verdicts " + desk.original_report.VerdictLabel() + " -> " +
            desk.distorted_report.VerdictLabel()};
  });
  report(6, "misclassification round trip", o, desk_seconds);

  start = Clock::now();
  o = guarded(Equivalence);
  report(7, "structured vs dense kernel plan", o, Seconds(start));

  start = Clock::now();
  o = guarded([&] {
    const DemoFigures full = Measure(36000);
    const double seconds = Seconds(start);
    const bool ok = seconds < 60.0 && RegulationHolds(full) &&
                    InvarianceHolds(full) && ClassificationHolds(full);
    return Outcome{ok, Format("K=36000 in %.2f s; regulation %.2e, mean gap "
                              "%.2e",
                              seconds, full.regulation_error, full.mean_gap) +
                           Format(", distortion %.9f", full.distortion)};
  });
  report(8, "full-horizon scale", o, Seconds(start));

  start = Clock::now();
  o = guarded(Properties);
  report(9, "property suites", o, Seconds(start));

  std::printf("%d of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}

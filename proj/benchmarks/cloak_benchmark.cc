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

#include <cstdint>
#include <random>

#include <benchmark/benchmark.h>

#include "cloak/engine.h"
#include "cloak/invariance.h"
#include "cloak/model.h"
#include "cloak/numerics.h"
#include "cloak/regulation.h"

namespace {

using cloak::StateSpaceMode;
using Eigen::MatrixXd;
using Eigen::VectorXd;

StateSpaceMode Vehicle(double tau, double beta, int id) {
  return cloak::DiscretizeZoh(cloak::LongitudinalVehicle(tau, beta, 0.1), id);
}

MatrixXd PrintedGain() {
  MatrixXd r(1, 3);
  r << -468.99, -130.18, -13.40;
  return r;
}

MatrixXd Inputs(Eigen::Index steps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  MatrixXd u(1, steps);
  for (Eigen::Index k = 0; k < steps; ++k) u(0, k) = uniform(rng);
  return u;
}

void BM_RegulatorSolve(benchmark::State& state) {
  const StateSpaceMode truth = Vehicle(0.01, 1.5, 1);
  const StateSpaceMode target = Vehicle(0.6, 0.7, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cloak::SolveRegulatorEquations(truth, target));
  }
}
BENCHMARK(BM_RegulatorSolve);

void BM_RiccatiGain(benchmark::State& state) {
  const StateSpaceMode target = Vehicle(0.6, 0.7, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cloak::DesignStabilizingGain(target));
  }
}
BENCHMARK(BM_RiccatiGain);

void BM_StructuredPlan(benchmark::State& state) {
  const StateSpaceMode target = Vehicle(0.6, 0.7, 2);
  const Eigen::Index horizon = state.range(0);
  const cloak::UtilitySpec spec = cloak::UtilitySpec::Average(horizon, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cloak::SolveUtilityInvariance(target, spec, 1.0, 1));
  }
  state.SetComplexityN(horizon);
}
BENCHMARK(BM_StructuredPlan)
    ->RangeMultiplier(4)
    ->Range(64, 36864)
    ->Unit(benchmark::kMillisecond)
    ->Complexity();

void BM_DensePlan(benchmark::State& state) {
  const StateSpaceMode target = Vehicle(0.6, 0.7, 2);
  const Eigen::Index horizon = state.range(0);
  const cloak::UtilitySpec spec = cloak::UtilitySpec::Average(horizon, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cloak::SolveUtilityInvarianceDense(target, spec, 1.0, 1));
  }
}
BENCHMARK(BM_DensePlan)->Arg(8)->Arg(32)->Arg(128)->Unit(
    benchmark::kMillisecond);

void BM_EngineStep(benchmark::State& state) {
  const StateSpaceMode truth = Vehicle(0.01, 1.5, 1);
  const StateSpaceMode target = Vehicle(0.6, 0.7, 2);
  const Eigen::Index horizon = 4096;
  const cloak::TrackingController controller =
      cloak::BuildTrackingController(
          cloak::SolveRegulatorEquations(truth, target), PrintedGain(),
          target);
  const cloak::KernelPlan plan = cloak::SolveUtilityInvariance(
      target, cloak::UtilitySpec::Average(horizon, 1), 1.0, 1);
  const cloak::Trajectory traj =
      cloak::SimulateMode(truth, VectorXd::Ones(3), Inputs(horizon - 1, 2));
  const cloak::DistortionConfig config{truth, target, controller, plan,
                                       horizon};
  for (auto _ : state) {
    benchmark::DoNotOptimize(cloak::RunOffline(config, traj));
  }
  state.SetItemsProcessed(state.iterations() * horizon);
}
BENCHMARK(BM_EngineStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

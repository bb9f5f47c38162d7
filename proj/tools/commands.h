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

#ifndef CLOAK_TOOLS_COMMANDS_H_
#define CLOAK_TOOLS_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "cloak/engine.h"
#include "cloak/errors.h"
#include "cloak/invariance.h"
#include "cloak/model.h"
#include "cloak/regulation.h"

namespace cloak::cli {

// 0 ok, 1 failed validation, 2 bad input or configuration, 3 regulation
// infeasible, 4 invariance infeasible.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidationFailed = 1,
  kExitBadInput = 2,
  kExitRegulationInfeasible = 3,
  kExitInvarianceInfeasible = 4,
};

int ExitCodeFor(ErrorCode code);

inline constexpr char kSeedEnvVar[] = "BEHAVIOR_CLOAK_SEED";

// The environment variable wins over the flag when set. Throws
// kInvalidInput if it is set but not an unsigned integer.
std::uint64_t ResolveSeed(std::uint64_t flag_seed);

struct ScenarioConfig {
  std::filesystem::path bank_path;
  int true_mode_id = 1;
  int target_mode_id = 2;
  // "average" or a path to a utility JSON file.
  std::string utility = "average";
  std::optional<Eigen::Index> horizon;
  double magnitude = 1.0;
  std::uint64_t seed = 0;
  std::filesystem::path output_directory = ".";
  // Caller-supplied feedback gain; synthesized when absent.
  std::optional<Eigen::MatrixXd> gain;
};

// Utility from the scenario; the horizon flag must agree with a file's K.
UtilitySpec ResolveUtility(const ScenarioConfig& scenario,
                           Eigen::Index outputs);

int CmdValidate(const std::filesystem::path& bank_path, std::ostream& out,
                std::ostream& err);

// Writes controller.json and plan.json into the output directory.
int CmdDesign(const ScenarioConfig& scenario, std::ostream& out,
              std::ostream& err);

int CmdDistort(const ScenarioConfig& scenario,
               const std::filesystem::path& controller_path,
               const std::filesystem::path& plan_path,
               const std::filesystem::path& trajectory_in,
               const std::filesystem::path& trajectory_out, std::ostream& out,
               std::ostream& err);

int CmdClassify(const std::filesystem::path& bank_path,
                const std::filesystem::path& trajectory_path,
                double accept_tol, std::ostream& out, std::ostream& err);

// Simulates one bank mode from a seeded random state under a seeded input
// uniform in [-1, 1]; states are recorded in the CSV.
int CmdSimulate(const std::filesystem::path& bank_path, int mode_id,
                Eigen::Index horizon, std::uint64_t seed,
                const std::filesystem::path& trajectory_out,
                std::ostream& out, std::ostream& err);

// End-to-end vehicle example; writes the bank, trajectories, designed
// artifacts and four figure CSVs into the output directory.
int CmdDemo(const std::filesystem::path& output_directory,
            Eigen::Index horizon, double magnitude, std::uint64_t seed,
            std::ostream& out, std::ostream& err);

// The two discretized vehicle modes: a fast sports car (mode 1) and a
// sluggish average car (mode 2), sampled at 0.1 s.
ModeBank VehicleBank();

// Gain placing the average car's closed-loop spectrum near {0.1, 0.2, 0.3}.
Eigen::MatrixXd VehicleGain();

struct DemoRun {
  ModeBank bank;
  Trajectory original;
  RegulatorSolution regulator;
  TrackingController controller;
  KernelPlan plan;
  RegulationDiagnostics regulation;
  DistortedTrajectory distorted;
  UtilitySpec utility;
};

// Runs the vehicle pipeline in memory: mode 1 driven by a seeded input in
// [-1, 1], distorted toward mode 2 with an average-preserving plan.
DemoRun RunVehicleDemo(Eigen::Index horizon, double magnitude,
                       std::uint64_t seed);

}  // namespace cloak::cli

#endif  // CLOAK_TOOLS_COMMANDS_H_

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

#include "commands.h"

#include <charconv>
#include <cstdlib>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cloak/adversary.h"
#include "cloak/io.h"

namespace cloak::cli {
namespace {

namespace fs = std::filesystem;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kVehicleSamplePeriod = 0.1;

int Report(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << "\n";
  return ExitCodeFor(e.code());
}

void EnsureDirectory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) ThrowInvalidInput("cannot create directory " + dir.string());
}

void RequireDistinctModes(const ModeBank& bank, const ScenarioConfig& s) {
  if (!bank.Contains(s.true_mode_id) || !bank.Contains(s.target_mode_id)) {
    ThrowInvalidInput("true and target mode ids must exist in the bank");
  }
  if (s.true_mode_id == s.target_mode_id) {
    ThrowInvalidInput("target mode must differ from the true mode");
  }
}

MatrixXd UniformInputs(Index inputs, Index steps, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  MatrixXd u(inputs, steps);
  for (Index k = 0; k < steps; ++k) {
    for (Index i = 0; i < inputs; ++i) u(i, k) = uniform(rng);
  }
  return u;
}

std::string Join(const VectorXd& v) {
  std::ostringstream out;
  out.precision(17);
  for (Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << v(i);
  return out.str();
}

// Columns k, <a>, <b> for two scalar-channel (or first-channel) series.
std::string PairCsv(const char* a_name, const MatrixXd& a, const char* b_name,
                    const MatrixXd& b, Index first_step) {
  std::ostringstream out;
  out.precision(17);
  out << "k," << a_name << "," << b_name << "\n";
  for (Index k = 0; k < a.cols(); ++k) {
    out << first_step + k << "," << a(0, k) << "," << b(0, k) << "\n";
  }
  return out.str();
}

struct Designed {
  ModeBank bank;
  UtilitySpec utility;
  RegulatorSolution regulator;
  TrackingController controller;
  KernelPlan plan;
};

Designed Design(const ScenarioConfig& scenario) {
  ModeBank bank = io::LoadModeBank(scenario.bank_path);
  RequireDistinctModes(bank, scenario);
  const StateSpaceMode& truth = bank.Get(scenario.true_mode_id);
  const StateSpaceMode& target = bank.Get(scenario.target_mode_id);
  UtilitySpec utility = ResolveUtility(scenario, bank.outputs());

  RegulatorSolution regulator = SolveRegulatorEquations(truth, target);
  const MatrixXd gain = scenario.gain
                            ? CheckStabilizingGain(target, *scenario.gain)
                            : DesignStabilizingGain(target);
  TrackingController controller =
      BuildTrackingController(regulator, gain, target);
  KernelPlan plan = SolveUtilityInvariance(target, utility, scenario.magnitude,
                                           scenario.seed);
  return {std::move(bank), std::move(utility), std::move(regulator),
          std::move(controller), std::move(plan)};
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInfeasibleRegulation:
    case ErrorCode::kDesignFailure:
      return kExitRegulationInfeasible;
    case ErrorCode::kAssumptionViolation:
    case ErrorCode::kInfeasibleInvariance:
      return kExitInvarianceInfeasible;
    case ErrorCode::kInvalidInput:
    case ErrorCode::kInconsistentData:
    case ErrorCode::kHorizonExhausted:
      return kExitBadInput;
  }
  return kExitBadInput;
}

std::uint64_t ResolveSeed(std::uint64_t flag_seed) {
  const char* env = std::getenv(kSeedEnvVar);
  if (env == nullptr || *env == '\0') return flag_seed;
  const std::string text(env);
  std::uint64_t seed = 0;
  const auto result =
      std::from_chars(text.data(), text.data() + text.size(), seed);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    ThrowInvalidInput(std::string(kSeedEnvVar) + "='" + text +
                      "' is not an unsigned integer");
  }
  return seed;
}

UtilitySpec ResolveUtility(const ScenarioConfig& scenario, Index outputs) {
  if (scenario.utility == "average") {
    if (!scenario.horizon) {
      ThrowInvalidInput("--K is required with the average utility");
    }
    return UtilitySpec::Average(*scenario.horizon, outputs);
  }
  UtilitySpec spec = io::LoadUtilitySpec(scenario.utility);
  if (scenario.horizon && *scenario.horizon != spec.horizon()) {
    ThrowInvalidInput("--K " + std::to_string(*scenario.horizon) +
                      " disagrees with the utility file's K " +
                      std::to_string(spec.horizon()));
  }
  if (spec.outputs() != outputs) {
    ThrowInvalidInput("utility spec does not match the bank's output count");
  }
  return spec;
}

int CmdValidate(const fs::path& bank_path, std::ostream& out,
                std::ostream& err) {
  try {
    const ModeBank bank = io::LoadModeBank(bank_path);
    std::vector<ValidationReport> reports;
    bool all_passed = true;
    for (const StateSpaceMode& mode : bank.modes()) {
      reports.push_back(ValidateMode(mode));
      all_passed = all_passed && reports.back().passed();
    }
    out << io::ValidationReportsToJson(reports);
    return all_passed ? kExitOk : kExitValidationFailed;
  } catch (const Error& e) {
    return Report(e, err);
  }
}

int CmdDesign(const ScenarioConfig& scenario, std::ostream& out,
              std::ostream& err) {
  try {
    const Designed d = Design(scenario);
    EnsureDirectory(scenario.output_directory);
    io::WriteFile(scenario.output_directory / "controller.json",
                  io::ControllerToJson({scenario.true_mode_id,
                                        scenario.target_mode_id,
                                        d.controller}));
    io::WriteFile(scenario.output_directory / "plan.json",
                  io::KernelPlanToJson(d.plan));
    const PlanCheck check =
        CheckPlan(d.bank.Get(scenario.target_mode_id), d.utility, d.plan);
    out << "regulator_residual " << d.regulator.residual << "\n"
        << "gain " << Join(d.controller.r.reshaped()) << "\n"
        << "plan_residual " << d.plan.residual << "\n"
        << "plan_kernel_violation " << check.kernel_violation << "\n"
        << "distortion_norm " << d.plan.delta_y.norm() << "\n";
    return kExitOk;
  } catch (const Error& e) {
    return Report(e, err);
  }
}

int CmdDistort(const ScenarioConfig& scenario, const fs::path& controller_path,
               const fs::path& plan_path, const fs::path& trajectory_in,
               const fs::path& trajectory_out, std::ostream& out,
               std::ostream& err) {
  try {
    const ModeBank bank = io::LoadModeBank(scenario.bank_path);
    RequireDistinctModes(bank, scenario);
    const StateSpaceMode& truth = bank.Get(scenario.true_mode_id);
    const StateSpaceMode& target = bank.Get(scenario.target_mode_id);
    const io::StoredController stored =
        io::ParseController(io::ReadFile(controller_path));
    if (stored.true_mode_id != truth.id() ||
        stored.target_mode_id != target.id()) {
      ThrowInvalidInput("controller was designed for a different mode pair");
    }
    const Trajectory trajectory = io::ReadTrajectoryCsv(trajectory_in);
    ScenarioConfig resolved = scenario;
    if (!resolved.horizon && resolved.utility == "average") {
      resolved.horizon = trajectory.horizon();
    }
    const UtilitySpec utility = ResolveUtility(resolved, bank.outputs());
    if (trajectory.horizon() != utility.horizon()) {
      ThrowInvalidInput("trajectory horizon " +
                        std::to_string(trajectory.horizon()) +
                        " does not match K = " +
                        std::to_string(utility.horizon()));
    }
    KernelPlan plan =
        io::ParseKernelPlan(io::ReadFile(plan_path), target, utility);

    DistortionConfig config{truth, target, stored.controller, std::move(plan),
                            utility.horizon()};
    const DistortedTrajectory distorted = RunOffline(config, trajectory);
    io::WriteTrajectoryCsv(trajectory_out, distorted.AsTrajectory(),
                           distorted.first_step);

    out.precision(17);
    out << "first_step " << distorted.first_step << "\n";
    out << "utility_original "
        << Join(utility.Evaluate(StackedOutputs(trajectory))) << "\n";
    if (distorted.first_step == 1) {
      out << "utility_distorted "
          << Join(utility.Evaluate(distorted.y.reshaped())) << "\n";
    } else {
      out << "utility_distorted unavailable (output withheld during state "
             "reconstruction)\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    return Report(e, err);
  }
}

int CmdClassify(const fs::path& bank_path, const fs::path& trajectory_path,
                double accept_tol, std::ostream& out, std::ostream& err) {
  try {
    const ModeBank bank = io::LoadModeBank(bank_path);
    const Trajectory trajectory = io::ReadTrajectoryCsv(trajectory_path);
    out << io::ClassificationReportToJson(
        Classify(bank, trajectory, accept_tol));
    return kExitOk;
  } catch (const Error& e) {
    return Report(e, err);
  }
}

int CmdSimulate(const fs::path& bank_path, int mode_id, Index horizon,
                std::uint64_t seed, const fs::path& trajectory_out,
                std::ostream& out, std::ostream& err) {
  try {
    if (horizon < 2) ThrowInvalidInput("--K must be >= 2");
    const ModeBank bank = io::LoadModeBank(bank_path);
    const StateSpaceMode& mode = bank.Get(mode_id);
    std::mt19937_64 rng(seed);
    const VectorXd x1 = GaussianVector(mode.states(), rng);
    const MatrixXd u = UniformInputs(mode.inputs(), horizon - 1, rng);
    io::WriteTrajectoryCsv(trajectory_out, SimulateMode(mode, x1, u));
    out << "wrote " << trajectory_out.string() << "\n";
    return kExitOk;
  } catch (const Error& e) {
    return Report(e, err);
  }
}

ModeBank VehicleBank() {
  return ModeBank(
      {DiscretizeZoh(LongitudinalVehicle(0.01, 1.5, kVehicleSamplePeriod), 1),
       DiscretizeZoh(LongitudinalVehicle(0.6, 0.7, kVehicleSamplePeriod), 2)});
}

MatrixXd VehicleGain() {
  MatrixXd r(1, 3);
  r << -468.99, -130.18, -13.40;
  return r;
}

DemoRun RunVehicleDemo(Index horizon, double magnitude, std::uint64_t seed) {
  ModeBank bank = VehicleBank();
  const StateSpaceMode& truth = bank.Get(1);
  const StateSpaceMode& target = bank.Get(2);

  std::mt19937_64 rng(seed);
  const VectorXd x1 = GaussianVector(truth.states(), rng);
  const MatrixXd u = UniformInputs(truth.inputs(), horizon - 1, rng);
  Trajectory original = SimulateMode(truth, x1, u);

  RegulatorSolution regulator = SolveRegulatorEquations(truth, target);
  TrackingController controller = BuildTrackingController(
      regulator, CheckStabilizingGain(target, VehicleGain()), target);
  UtilitySpec utility = UtilitySpec::Average(horizon, truth.outputs());
  KernelPlan plan = SolveUtilityInvariance(target, utility, magnitude, seed);
  RegulationDiagnostics regulation =
      VerifyRegulation(truth, target, controller, original);
  DistortedTrajectory distorted = RunOffline(
      DistortionConfig{truth, target, controller, plan, horizon}, original);
  return {std::move(bank),       std::move(original),   std::move(regulator),
          std::move(controller), std::move(plan),       std::move(regulation),
          std::move(distorted),  std::move(utility)};
}

int CmdDemo(const fs::path& output_directory, Index horizon, double magnitude,
            std::uint64_t seed, std::ostream& out, std::ostream& err) {
  try {
    if (horizon < 2) ThrowInvalidInput("--K must be >= 2");
    const DemoRun run = RunVehicleDemo(horizon, magnitude, seed);
    EnsureDirectory(output_directory);
    io::WriteFile(output_directory / "bank.json", io::ModeBankToJson(run.bank));
    io::WriteTrajectoryCsv(output_directory / "original.csv", run.original);
    io::WriteTrajectoryCsv(output_directory / "distorted.csv",
                           run.distorted.AsTrajectory());
    io::WriteFile(output_directory / "controller.json",
                  io::ControllerToJson({1, 2, run.controller}));
    io::WriteFile(output_directory / "plan.json",
                  io::KernelPlanToJson(run.plan));
    io::WriteFile(output_directory / "fig1_outputs_regulated.csv",
                  PairCsv("y", run.original.y, "y1bar", run.regulation.y1bar, 1));
    io::WriteFile(output_directory / "fig2_inputs_regulated.csv",
                  PairCsv("u", run.original.u, "u1bar", run.regulation.u1bar, 1));
    io::WriteFile(output_directory / "fig3_outputs_distorted.csv",
                  PairCsv("y", run.original.y, "ybar", run.distorted.y, 1));
    io::WriteFile(output_directory / "fig4_inputs_distorted.csv",
                  PairCsv("u", run.original.u, "ubar", run.distorted.u, 1));

    const double mean_y = run.original.y.mean();
    const double mean_ybar = run.distorted.y.mean();
    out.precision(17);
    out << "theta " << run.regulator.theta(0, 0) << "\n"
        << "max_regulation_error " << run.regulation.max_output_error << "\n"
        << "mean_y " << mean_y << "\n"
        << "mean_ybar " << mean_ybar << "\n"
        << "distortion_norm " << run.distorted.delta_y.norm() << "\n";
    return kExitOk;
  } catch (const Error& e) {
    return Report(e, err);
  }
}

}  // namespace cloak::cli

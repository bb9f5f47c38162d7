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

// behavior_cloak: distort single-mode trajectories toward a target mode while
// keeping a linear utility of the outputs unchanged.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cloak/adversary.h"
#include "commands.h"

namespace {

namespace cli = cloak::cli;

// "a,b,c" -> 1 x 3 gain (single-input banks); rows separated by ';'.
Eigen::MatrixXd ParseGain(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream row_stream(text);
  std::string row;
  while (std::getline(row_stream, row, ';')) {
    std::vector<double> values;
    std::stringstream cell_stream(row);
    std::string cell;
    while (std::getline(cell_stream, cell, ',')) values.push_back(std::stod(cell));
    rows.push_back(std::move(values));
  }
  if (rows.empty() || rows.front().empty()) {
    cloak::ThrowInvalidInput("--gain is empty");
  }
  Eigen::MatrixXd gain(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) {
      cloak::ThrowInvalidInput("--gain rows differ in length");
    }
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      gain(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
    }
  }
  return gain;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Utility-preserving trajectory distortion for switched "
               "linear systems"};
  app.require_subcommand(1);

  cli::ScenarioConfig scenario;
  Eigen::Index horizon = 0;
  std::string gain_text;
  std::string controller_path;
  std::string plan_path;
  std::string trajectory_in;
  std::string trajectory_out;
  double accept_tol = cloak::kDefaultAcceptTol;
  int mode_id = 1;
  std::string bank_path;
  std::string out_dir = ".";

  auto add_scenario = [&](CLI::App* sub) {
    sub->add_option("--bank", bank_path, "Model-bank JSON")->required();
    sub->add_option("--true-mode", scenario.true_mode_id, "Generating mode id");
    sub->add_option("--target-mode", scenario.target_mode_id,
                    "Mode to imitate");
    sub->add_option("--utility", scenario.utility,
                    "'average' or a utility JSON file");
    sub->add_option("--K", horizon, "Horizon length");
    sub->add_option("--magnitude", scenario.magnitude,
                    "Output distortion 2-norm");
    sub->add_option("--seed", scenario.seed, "Seed for the plan draw");
    sub->add_option("--out", out_dir, "Output directory");
  };

  CLI::App* validate = app.add_subcommand("validate", "Check mode assumptions");
  validate->add_option("--bank", bank_path, "Model-bank JSON")->required();

  CLI::App* design =
      app.add_subcommand("design", "Design controller and kernel plan");
  add_scenario(design);
  design->add_option("--gain", gain_text,
                     "Stabilizing gain R, e.g. '-468.99,-130.18,-13.40'");

  CLI::App* distort = app.add_subcommand("distort", "Distort a trajectory");
  add_scenario(distort);
  distort->add_option("--controller", controller_path,
                      "Controller JSON (default <out>/controller.json)");
  distort->add_option("--plan", plan_path,
                      "Kernel plan JSON (default <out>/plan.json)");
  distort->add_option("--in", trajectory_in, "Trajectory CSV")->required();
  distort->add_option("--output", trajectory_out,
                      "Distorted CSV (default <out>/distorted.csv)");

  CLI::App* classify =
      app.add_subcommand("classify", "Behaviour-membership classification");
  classify->add_option("--bank", bank_path, "Model-bank JSON")->required();
  classify->add_option("--in", trajectory_in, "Trajectory CSV")->required();
  classify->add_option("--accept-tol", accept_tol,
                       "Residual threshold for accepting a mode");

  CLI::App* simulate =
      app.add_subcommand("simulate", "Simulate a mode under random input");
  simulate->add_option("--bank", bank_path, "Model-bank JSON")->required();
  simulate->add_option("--mode", mode_id, "Mode id");
  simulate->add_option("--K", horizon, "Horizon length")->required();
  simulate->add_option("--seed", scenario.seed, "Seed");
  simulate->add_option("--output", trajectory_out, "Trajectory CSV")
      ->required();

  CLI::App* demo = app.add_subcommand("demo", "Vehicle example end to end");
  demo->add_option("--out", out_dir, "Output directory");
  demo->add_option("--K", horizon, "Horizon length (default 500)");
  demo->add_option("--magnitude", scenario.magnitude,
                   "Output distortion 2-norm");
  demo->add_option("--seed", scenario.seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitBadInput;
  }

  try {
    scenario.seed = cli::ResolveSeed(scenario.seed);
    scenario.bank_path = bank_path;
    scenario.output_directory = out_dir;
    if (horizon > 0) scenario.horizon = horizon;
    if (!gain_text.empty()) scenario.gain = ParseGain(gain_text);
  } catch (const cloak::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitBadInput;
  }

  const std::filesystem::path out_path(out_dir);
  if (*validate) return cli::CmdValidate(bank_path, std::cout, std::cerr);
  if (*design) return cli::CmdDesign(scenario, std::cout, std::cerr);
  if (*distort) {
    return cli::CmdDistort(
        scenario,
        controller_path.empty() ? out_path / "controller.json"
                                : std::filesystem::path(controller_path),
        plan_path.empty() ? out_path / "plan.json"
                          : std::filesystem::path(plan_path),
        trajectory_in,
        trajectory_out.empty() ? out_path / "distorted.csv"
                               : std::filesystem::path(trajectory_out),
        std::cout, std::cerr);
  }
  if (*classify) {
    return cli::CmdClassify(bank_path, trajectory_in, accept_tol, std::cout,
                            std::cerr);
  }
  if (*simulate) {
    return cli::CmdSimulate(bank_path, mode_id, horizon, scenario.seed,
                            trajectory_out, std::cout, std::cerr);
  }
  return cli::CmdDemo(out_path, horizon > 0 ? horizon : 500,
                      scenario.magnitude, scenario.seed, std::cout, std::cerr);
}

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

#ifndef CLOAK_IO_H_
#define CLOAK_IO_H_

#include <filesystem>
#include <string>
#include <vector>

#include "cloak/adversary.h"
#include "cloak/engine.h"
#include "cloak/invariance.h"
#include "cloak/model.h"
#include "cloak/regulation.h"

// File formats. All readers throw cloak::Error(kInvalidInput) on unreadable
// or ill-formed input.
namespace cloak::io {

// {"m": int, "l": int, "modes": [{"id": int, "A": [[...]], "B": [[...]],
// "C": [[...]]}]} with row-major matrices.
ModeBank ParseModeBank(const std::string& json_text);
ModeBank LoadModeBank(const std::filesystem::path& path);
std::string ModeBankToJson(const ModeBank& bank);

// CSV with header k,u_1..u_l,y_1..y_m[,x_1..x_n]. The last row carries
// empty input cells.
Trajectory ParseTrajectoryCsv(const std::string& csv_text);
Trajectory ReadTrajectoryCsv(const std::filesystem::path& path);
// first_step sets the k column of the first row.
std::string TrajectoryToCsv(const Trajectory& trajectory,
                            Eigen::Index first_step = 1);
void WriteTrajectoryCsv(const std::filesystem::path& path,
                        const Trajectory& trajectory,
                        Eigen::Index first_step = 1);

// {"K": int, "q": int, "F": [[...]], "mu": [...]} or the shorthand
// {"kind": "average", "K": int, "m": int}.
UtilitySpec ParseUtilitySpec(const std::string& json_text);
UtilitySpec LoadUtilitySpec(const std::filesystem::path& path);

// {"x2_init": [...], "U2": [[...]], "seed": int, "magnitude": real} plus
// the target mode id. U2 lists one input vector per step.
std::string KernelPlanToJson(const KernelPlan& plan);
// delta_y is recomputed by simulating the target mode.
KernelPlan ParseKernelPlan(const std::string& json_text,
                           const StateSpaceMode& target_mode,
                           const UtilitySpec& spec);

struct StoredController {
  int true_mode_id = 0;
  int target_mode_id = 0;
  TrackingController controller;
};
std::string ControllerToJson(const StoredController& stored);
StoredController ParseController(const std::string& json_text);

// {"residuals": {id: real}, "accepted": [ids], "verdict": "1"|...}.
std::string ClassificationReportToJson(const ClassificationReport& report);

std::string ValidationReportsToJson(
    const std::vector<ValidationReport>& reports);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, const std::string& text);

}  // namespace cloak::io

#endif  // CLOAK_IO_H_

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

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"

#include "cloak/errors.h"

namespace cloak::io {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

json Parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    ThrowInvalidInput(std::string(what) + ": " + e.what());
  }
}

MatrixXd MatrixFromJson(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) {
    ThrowInvalidInput(what + " must be a non-empty array of rows");
  }
  const Index rows = static_cast<Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) {
    ThrowInvalidInput(what + " rows must be non-empty arrays");
  }
  const Index cols = static_cast<Index>(j[0].size());
  MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      ThrowInvalidInput(what + " is ragged at row " + std::to_string(r));
    }
    for (Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) ThrowInvalidInput(what + " has a non-number entry");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

VectorXd VectorFromJson(const json& j, const std::string& what) {
  if (!j.is_array()) ThrowInvalidInput(what + " must be an array");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) ThrowInvalidInput(what + " has a non-number entry");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

json MatrixToJson(const MatrixXd& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json VectorToJson(const VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

template <typename T>
T Field(const json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) {
    ThrowInvalidInput(what + " is missing \"" + key + "\"");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    ThrowInvalidInput(what + " field \"" + key + "\": " + e.what());
  }
}

// Shortest round-trip text for a double.
std::string FormatDouble(double value) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

double ParseDouble(const std::string& cell, std::size_t line) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && *begin == ' ') ++begin;
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    ThrowInvalidInput("CSV line " + std::to_string(line) +
                      ": cannot parse number '" + cell + "'");
  }
  return value;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// Counts header columns named prefix_1, prefix_2, ... starting at `pos`.
Index CountColumns(const std::vector<std::string>& header, std::size_t& pos,
                   const std::string& prefix) {
  Index count = 0;
  while (pos < header.size() &&
         header[pos] == prefix + "_" + std::to_string(count + 1)) {
    ++count;
    ++pos;
  }
  return count;
}

}  // namespace

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowInvalidInput("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) ThrowInvalidInput("cannot write " + path.string());
  out << text;
  if (!out) ThrowInvalidInput("failed writing " + path.string());
}

ModeBank ParseModeBank(const std::string& json_text) {
  const json doc = Parse(json_text, "model bank");
  const int m = Field<int>(doc, "m", "model bank");
  const int l = Field<int>(doc, "l", "model bank");
  if (!doc.contains("modes") || !doc["modes"].is_array()) {
    ThrowInvalidInput("model bank needs a \"modes\" array");
  }
  std::vector<StateSpaceMode> modes;
  for (const json& entry : doc["modes"]) {
    const int id = Field<int>(entry, "id", "mode entry");
    const std::string tag = "mode " + std::to_string(id);
    if (!entry.contains("A") || !entry.contains("B") || !entry.contains("C")) {
      ThrowInvalidInput(tag + " needs A, B and C");
    }
    StateSpaceMode mode(id, MatrixFromJson(entry["A"], tag + " A"),
                        MatrixFromJson(entry["B"], tag + " B"),
                        MatrixFromJson(entry["C"], tag + " C"));
    if (mode.outputs() != m || mode.inputs() != l) {
      ThrowInvalidInput(tag + " does not have the declared m and l");
    }
    modes.push_back(std::move(mode));
  }
  return ModeBank(std::move(modes));
}

ModeBank LoadModeBank(const std::filesystem::path& path) {
  return ParseModeBank(ReadFile(path));
}

std::string ModeBankToJson(const ModeBank& bank) {
  json doc;
  doc["m"] = bank.outputs();
  doc["l"] = bank.inputs();
  doc["modes"] = json::array();
  for (const StateSpaceMode& mode : bank.modes()) {
    doc["modes"].push_back({{"id", mode.id()},
                            {"A", MatrixToJson(mode.a())},
                            {"B", MatrixToJson(mode.b())},
                            {"C", MatrixToJson(mode.c())}});
  }
  return doc.dump(2) + "\n";
}

Trajectory ParseTrajectoryCsv(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) ThrowInvalidInput("trajectory CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = SplitCsv(line);
  if (header.empty() || header[0] != "k") {
    ThrowInvalidInput("trajectory CSV header must start with k");
  }
  std::size_t pos = 1;
  const Index l = CountColumns(header, pos, "u");
  const Index m = CountColumns(header, pos, "y");
  const Index n = CountColumns(header, pos, "x");
  if (l == 0 || m == 0 || pos != header.size()) {
    ThrowInvalidInput("trajectory CSV header must read k,u_1..u_l,y_1..y_m"
                      "[,x_1..x_n]");
  }

  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(SplitCsv(line));
  }
  const Index horizon = static_cast<Index>(rows.size());
  if (horizon < 2) ThrowInvalidInput("trajectory CSV needs at least 2 rows");

  Trajectory traj;
  traj.u.resize(l, horizon - 1);
  traj.y.resize(m, horizon);
  if (n > 0) traj.x = MatrixXd(n, horizon);
  for (Index k = 0; k < horizon; ++k) {
    const auto& cells = rows[static_cast<std::size_t>(k)];
    const std::size_t line_no = static_cast<std::size_t>(k) + 2;
    if (cells.size() != header.size()) {
      ThrowInvalidInput("CSV line " + std::to_string(line_no) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
    }
    const double k_value = ParseDouble(cells[0], line_no);
    const double expected_k =
        k == 0 ? k_value : ParseDouble(rows[0][0], 2) + static_cast<double>(k);
    if (k_value != expected_k) {
      ThrowInvalidInput("CSV line " + std::to_string(line_no) +
                        ": k must increase by one per row");
    }
    for (Index i = 0; i < l; ++i) {
      const std::string& cell = cells[static_cast<std::size_t>(1 + i)];
      if (k + 1 == horizon) {
        if (!cell.empty()) {
          ThrowInvalidInput("last CSV row must leave the input cells empty");
        }
        continue;
      }
      traj.u(i, k) = ParseDouble(cell, line_no);
    }
    for (Index i = 0; i < m; ++i) {
      traj.y(i, k) =
          ParseDouble(cells[static_cast<std::size_t>(1 + l + i)], line_no);
    }
    for (Index i = 0; i < n; ++i) {
      (*traj.x)(i, k) =
          ParseDouble(cells[static_cast<std::size_t>(1 + l + m + i)], line_no);
    }
  }
  traj.Validate();
  return traj;
}

Trajectory ReadTrajectoryCsv(const std::filesystem::path& path) {
  return ParseTrajectoryCsv(ReadFile(path));
}

std::string TrajectoryToCsv(const Trajectory& trajectory, Index first_step) {
  trajectory.Validate();
  const Index horizon = trajectory.horizon();
  const Index l = trajectory.u.rows();
  const Index m = trajectory.y.rows();
  std::string out = "k";
  for (Index i = 1; i <= l; ++i) out += ",u_" + std::to_string(i);
  for (Index i = 1; i <= m; ++i) out += ",y_" + std::to_string(i);
  if (trajectory.x) {
    for (Index i = 1; i <= trajectory.x->rows(); ++i) {
      out += ",x_" + std::to_string(i);
    }
  }
  out += '\n';
  for (Index k = 0; k < horizon; ++k) {
    out += std::to_string(first_step + k);
    for (Index i = 0; i < l; ++i) {
      out += ',';
      if (k + 1 < horizon) out += FormatDouble(trajectory.u(i, k));
    }
    for (Index i = 0; i < m; ++i) {
      out += ',';
      out += FormatDouble(trajectory.y(i, k));
    }
    if (trajectory.x) {
      for (Index i = 0; i < trajectory.x->rows(); ++i) {
        out += ',';
        out += FormatDouble((*trajectory.x)(i, k));
      }
    }
    out += '\n';
  }
  return out;
}

void WriteTrajectoryCsv(const std::filesystem::path& path,
                        const Trajectory& trajectory, Index first_step) {
  WriteFile(path, TrajectoryToCsv(trajectory, first_step));
}

UtilitySpec ParseUtilitySpec(const std::string& json_text) {
  const json doc = Parse(json_text, "utility spec");
  const Index horizon = Field<Index>(doc, "K", "utility spec");
  if (doc.contains("kind")) {
    const std::string kind = Field<std::string>(doc, "kind", "utility spec");
    if (kind != "average") {
      ThrowInvalidInput("unknown utility shorthand \"" + kind + "\"");
    }
    return UtilitySpec::Average(horizon, Field<Index>(doc, "m", "utility spec"));
  }
  if (!doc.contains("F") || !doc.contains("mu")) {
    ThrowInvalidInput("utility spec needs F and mu (or \"kind\")");
  }
  MatrixXd f = MatrixFromJson(doc["F"], "utility F");
  VectorXd mu = VectorFromJson(doc["mu"], "utility mu");
  if (doc.contains("q") && Field<Index>(doc, "q", "utility spec") != f.rows()) {
    ThrowInvalidInput("utility spec q does not match the rows of F");
  }
  return UtilitySpec(std::move(f), std::move(mu), horizon);
}

UtilitySpec LoadUtilitySpec(const std::filesystem::path& path) {
  return ParseUtilitySpec(ReadFile(path));
}

std::string KernelPlanToJson(const KernelPlan& plan) {
  json doc;
  doc["target_mode"] = plan.target_mode_id;
  doc["x2_init"] = VectorToJson(plan.x2_init);
  doc["U2"] = MatrixToJson(plan.u2.transpose());
  doc["seed"] = plan.seed;
  doc["magnitude"] = plan.magnitude;
  return doc.dump(2) + "\n";
}

KernelPlan ParseKernelPlan(const std::string& json_text,
                           const StateSpaceMode& target_mode,
                           const UtilitySpec& spec) {
  const json doc = Parse(json_text, "kernel plan");
  KernelPlan plan;
  plan.target_mode_id =
      doc.contains("target_mode") ? Field<int>(doc, "target_mode", "kernel plan")
                                  : target_mode.id();
  if (plan.target_mode_id != target_mode.id()) {
    ThrowInvalidInput("kernel plan was built for mode " +
                      std::to_string(plan.target_mode_id));
  }
  if (!doc.contains("x2_init") || !doc.contains("U2")) {
    ThrowInvalidInput("kernel plan needs x2_init and U2");
  }
  plan.x2_init = VectorFromJson(doc["x2_init"], "plan x2_init");
  plan.seed = Field<std::uint64_t>(doc, "seed", "kernel plan");
  plan.magnitude = Field<double>(doc, "magnitude", "kernel plan");
  const Index steps = spec.horizon() - 1;
  if (doc["U2"].is_array() && doc["U2"].empty()) {
    ThrowInvalidInput("plan U2 is empty");
  }
  plan.u2 = MatrixFromJson(doc["U2"], "plan U2").transpose();
  if (plan.x2_init.size() != target_mode.states() ||
      plan.u2.rows() != target_mode.inputs() || plan.u2.cols() != steps) {
    ThrowInvalidInput("kernel plan does not match the target mode and K = " +
                      std::to_string(spec.horizon()));
  }
  plan.delta_y = LiftedResponse(target_mode, plan.x2_init, plan.u2);
  plan.theta = plan.delta_y;
  plan.residual = (plan.delta_y - spec.ProjectOntoKernel(plan.theta)).norm();
  return plan;
}

std::string ControllerToJson(const StoredController& stored) {
  json doc;
  doc["true_mode"] = stored.true_mode_id;
  doc["target_mode"] = stored.target_mode_id;
  doc["R"] = MatrixToJson(stored.controller.r);
  doc["L"] = MatrixToJson(stored.controller.l);
  doc["S"] = MatrixToJson(stored.controller.s);
  doc["Pi"] = MatrixToJson(stored.controller.pi);
  return doc.dump(2) + "\n";
}

StoredController ParseController(const std::string& json_text) {
  const json doc = Parse(json_text, "controller");
  StoredController stored;
  stored.true_mode_id = Field<int>(doc, "true_mode", "controller");
  stored.target_mode_id = Field<int>(doc, "target_mode", "controller");
  for (const char* key : {"R", "L", "S", "Pi"}) {
    if (!doc.contains(key)) {
      ThrowInvalidInput(std::string("controller is missing ") + key);
    }
  }
  stored.controller.r = MatrixFromJson(doc["R"], "controller R");
  stored.controller.l = MatrixFromJson(doc["L"], "controller L");
  stored.controller.s = MatrixFromJson(doc["S"], "controller S");
  stored.controller.pi = MatrixFromJson(doc["Pi"], "controller Pi");
  return stored;
}

std::string ClassificationReportToJson(const ClassificationReport& report) {
  json doc;
  json residuals = json::object();
  for (const auto& [id, value] : report.residuals) {
    residuals[std::to_string(id)] = value;
  }
  doc["residuals"] = residuals;
  doc["accepted"] = report.accepted;
  doc["verdict"] = report.VerdictLabel();
  return doc.dump(2) + "\n";
}

std::string ValidationReportsToJson(
    const std::vector<ValidationReport>& reports) {
  json doc;
  doc["passed"] = true;
  doc["modes"] = json::array();
  for (const ValidationReport& report : reports) {
    json mode;
    mode["id"] = report.mode_id;
    mode["passed"] = report.passed();
    json checks = json::array();
    json failed = json::array();
    for (const AssumptionCheck& check : report.checks) {
      checks.push_back({{"name", check.name},
                        {"rank", check.rank},
                        {"required", check.required},
                        {"passed", check.passed}});
      if (!check.passed) failed.push_back(check.name);
    }
    mode["checks"] = checks;
    mode["failed"] = failed;
    if (!report.passed()) doc["passed"] = false;
    doc["modes"].push_back(std::move(mode));
  }
  return doc.dump(2) + "\n";
}

}  // namespace cloak::io

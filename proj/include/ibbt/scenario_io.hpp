#pragma once

#include "ibbt/environment.hpp"
#include "ibbt/planner.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace ibbt {

/// Scenario plus the planner defaults stored alongside it.
struct ScenarioFile {
  Scenario scenario;
  PlannerConfig config;
};

/// Malformed input: JSON syntax (with line and column) or a schema/type error
/// naming the offending field.
struct ScenarioParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Well-formed input that violates scenario invariants; lists every violation.
struct ScenarioValidationError : std::runtime_error {
  explicit ScenarioValidationError(std::vector<std::string> v);
  std::vector<std::string> violations;
};

ScenarioFile parse_scenario(const std::string& text);
ScenarioFile load_scenario(const std::string& path);

nlohmann::json scenario_to_json(const ScenarioFile& file);
ScenarioFile scenario_from_json(const nlohmann::json& j);
std::string write_scenario(const ScenarioFile& file);

/// Matrix encoding used by the scenario format: a number is a scaled
/// identity, a flat array is a diagonal, nested arrays are full rows.
Mat matrix_from_json(const nlohmann::json& j, int rows, int cols, const std::string& field);
nlohmann::json matrix_to_json(const Mat& m);

}  // namespace ibbt

#pragma once

#include "ibbt/planner.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace ibbt {

/// Rounds to 12 significant digits; non-finite values pass through.
double round12(double v);

/// Result document: embedded scenario, solution path with covariances, dense
/// nominal trajectory, anytime (batch, cost) pairs, counters, the graph and
/// the belief-tree position marginals. Wall-clock times are left out so the
/// document is reproducible byte for byte.
nlohmann::json result_to_json(const Planner& planner, const PlanResult& result);

std::string write_result(const Planner& planner, const PlanResult& result);

/// Anytime trace as CSV with header `wall_s,batch,cost`.
void write_anytime_csv(std::ostream& os, const std::vector<TracePoint>& trace);

/// Nominal states along a solution, concatenating the edges' trajectories.
std::vector<StateVec> solution_trajectory(const Graph& graph, const std::vector<PathStep>& path);

}  // namespace ibbt

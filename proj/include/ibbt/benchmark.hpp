#pragma once

#include "ibbt/planner.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace ibbt {

struct BenchmarkRecord {
  PlannerMode planner = PlannerMode::IBBT;
  std::uint64_t seed = 0;
  double first_solution_seconds = kInf;
  double first_solution_cost = kInf;
  std::size_t first_solution_pops = 0;  // queue pops when the first solution was recorded
  std::size_t first_solution_nodes = 0; // belief nodes created by then
  double final_cost = kInf;
  std::vector<TracePoint> trace;
  PlanStats stats;
};

struct BenchmarkSummary {
  PlannerMode planner = PlannerMode::IBBT;
  std::size_t runs = 0;
  std::size_t solved = 0;
  double median_first_solution_seconds = kInf;
  double median_first_solution_cost = kInf;
  double median_first_solution_pops = kInf;
  double median_final_cost = kInf;
};

struct BenchmarkReport {
  std::vector<BenchmarkRecord> records;
  std::vector<BenchmarkSummary> summaries;
};

/// Median of the values; +inf entries sort last. Empty input gives +inf.
double median(std::vector<double> v);

/// One planner run with progress tracking for the first solution.
BenchmarkRecord run_single(const Scenario& scenario, PlannerConfig config);

/// Runs every planner on every seed. `threads` <= 1 runs sequentially.
BenchmarkReport run_benchmark(const Scenario& scenario, const PlannerConfig& base,
                              const std::vector<std::uint64_t>& seeds, const std::vector<PlannerMode>& planners,
                              int threads = 1);

nlohmann::json report_to_json(const BenchmarkReport& report);

/// Combined cost-vs-time CSV: `planner,seed,wall_s,batch,cost`.
void write_benchmark_csv(std::ostream& os, const BenchmarkReport& report);

}  // namespace ibbt

#include "ibbt/benchmark.hpp"
#include "ibbt/planner.hpp"
#include "ibbt/render.hpp"
#include "ibbt/result_io.hpp"
#include "ibbt/scenario_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace ibbt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNoSolution = 2;

enum class LogLevel { Quiet, Info, Debug };

LogLevel log_level() {
  const char* env = std::getenv("IBBT_LOG");
  if (!env) return LogLevel::Info;
  const std::string v(env);
  if (v == "quiet" || v == "0" || v == "off") return LogLevel::Quiet;
  if (v == "debug" || v == "2") return LogLevel::Debug;
  return LogLevel::Info;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw UsageError("cannot write " + p.string());
  out << text;
  if (!out) throw UsageError("failed writing " + p.string());
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory " + dir.string());
}

std::string cost_str(double c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", c);
  return buf;
}

/// Overrides shared by plan and benchmark.
struct Overrides {
  std::optional<std::string> planner;
  std::optional<std::uint64_t> seed;
  std::optional<int> batch_size;
  std::optional<double> delta;
  std::optional<int> mc_samples;
  std::optional<double> max_seconds;
  std::optional<int> max_batches;

  void add_to(CLI::App* app, bool with_planner_and_seed) {
    if (with_planner_and_seed) {
      app->add_option("--planner", planner, "ibbt or rrbt")->check(CLI::IsMember({"ibbt", "rrbt"}));
      app->add_option("--seed", seed, "Run seed");
    }
    app->add_option("--batch-size", batch_size, "Samples per batch (informed mode)")->check(CLI::PositiveNumber);
    app->add_option("--delta", delta, "Chance-constraint bound")->check(CLI::Range(0.0, 1.0));
    app->add_option("--mc-samples", mc_samples, "Monte-Carlo samples per collision check");
    app->add_option("--max-seconds", max_seconds, "Wall-clock budget; 0 disables");
    app->add_option("--max-batches", max_batches, "Batch budget; 0 disables");
  }

  void apply(ScenarioFile& f) const {
    if (planner) f.config.mode = planner_mode_from_string(*planner);
    if (seed) f.config.seed = *seed;
    if (batch_size) f.config.batch_size = *batch_size;
    if (delta) f.scenario.delta = f.config.chance.delta = *delta;
    if (mc_samples) f.config.chance.mc_samples = *mc_samples;
    if (max_seconds) f.config.max_seconds = *max_seconds;
    if (max_batches) f.config.max_batches = *max_batches;
    if (auto v = f.scenario.violations(); !v.empty()) throw ScenarioValidationError(v);
    try {
      f.config.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
};

int run_plan(const std::string& scenario_path, const Overrides& ov, const std::string& out_dir) {
  ScenarioFile f = load_scenario(scenario_path);
  ov.apply(f);
  const fs::path dir(out_dir);
  prepare_dir(dir);
  const LogLevel level = log_level();

  Planner planner(f.scenario, f.config);
  int solution_index = 0;
  const PlanResult result = planner.run([&](const ProgressEvent& ev, const Planner& p) {
    if (ev.kind == ProgressEvent::Kind::Solution) {
      ++solution_index;
      char name[32];
      std::snprintf(name, sizeof name, "solution_%03d.svg", solution_index);
      write_file(dir / name, render_svg(scene_from_planner(p, p.result().solution_path)));
      if (level != LogLevel::Quiet)
        std::cerr << "[solution] batch=" << ev.batch << " t=" << cost_str(ev.elapsed) << "s cost="
                  << cost_str(ev.best_cost) << " nodes=" << ev.stats.nodes_created << '\n';
    } else if (ev.kind == ProgressEvent::Kind::Batch && level == LogLevel::Debug) {
      std::cerr << "[batch] " << ev.batch << " t=" << cost_str(ev.elapsed) << "s V=" << ev.stats.vertices
                << " E=" << ev.stats.edges << " nodes=" << ev.stats.nodes_alive << '/' << ev.stats.nodes_created
                << " pops=" << ev.stats.queue_pops << " best=" << cost_str(ev.best_cost) << '\n';
    }
  });

  write_file(dir / "result.json", write_result(planner, result));
  std::ostringstream csv;
  write_anytime_csv(csv, result.anytime_trace);
  write_file(dir / "anytime.csv", csv.str());
  if (level != LogLevel::Quiet)
    std::cerr << "[done] batches=" << result.stats.batches << " vertices=" << result.stats.vertices
              << " cost=" << (result.solved() ? cost_str(result.cost) : std::string("inf")) << '\n';
  return result.solved() ? kExitOk : kExitNoSolution;
}

std::vector<PlannerMode> parse_planners(const std::string& list) {
  std::vector<PlannerMode> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(planner_mode_from_string(item));
  if (out.empty()) throw UsageError("--planners: no planner given");
  return out;
}

int run_bench(const std::string& scenario_path, int seeds, std::uint64_t first_seed, const std::string& planners,
              int threads, const Overrides& ov, const std::string& out_dir) {
  ScenarioFile f = load_scenario(scenario_path);
  ov.apply(f);
  const std::vector<PlannerMode> modes = parse_planners(planners);
  std::vector<std::uint64_t> seed_list;
  for (int i = 0; i < seeds; ++i) seed_list.push_back(first_seed + static_cast<std::uint64_t>(i));
  const fs::path dir(out_dir);
  prepare_dir(dir);

  const BenchmarkReport report = run_benchmark(f.scenario, f.config, seed_list, modes, threads);
  write_file(dir / "report.json", report_to_json(report).dump(2) + "\n");
  std::ostringstream csv;
  write_benchmark_csv(csv, report);
  write_file(dir / "benchmark.csv", csv.str());
  if (log_level() != LogLevel::Quiet)
    for (const auto& s : report.summaries)
      std::cerr << to_string(s.planner) << ": solved " << s.solved << '/' << s.runs
                << " median first-solution time " << cost_str(s.median_first_solution_seconds) << "s, cost "
                << cost_str(s.median_first_solution_cost) << ", pops " << cost_str(s.median_first_solution_pops)
                << '\n';
  return kExitOk;
}

int run_render(const std::string& result_path, const std::string& out) {
  std::ifstream in(result_path);
  if (!in) throw UsageError("cannot open " + result_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(result_path + ": " + e.what());
  }
  write_file(out, render_svg(scene_from_result(j)));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Belief-space motion planner with informed batch search and an exhaustive baseline"};
  app.require_subcommand(1);

  std::string scenario, out_dir = "out";
  Overrides plan_ov, bench_ov;
  CLI::App* plan = app.add_subcommand("plan", "Plan on a scenario and write result.json, anytime.csv and SVGs");
  plan->add_option("--scenario", scenario, "Scenario JSON file")->required();
  plan->add_option("--out", out_dir, "Output directory");
  plan_ov.add_to(plan, true);

  int seeds = 20;
  std::uint64_t first_seed = 1;
  std::string planners = "ibbt,rrbt";
  int threads = 1;
  CLI::App* bench = app.add_subcommand("benchmark", "Run planners over seeds and aggregate medians");
  bench->add_option("--scenario", scenario, "Scenario JSON file")->required();
  bench->add_option("--seeds", seeds, "Number of seeds")->check(CLI::PositiveNumber);
  bench->add_option("--first-seed", first_seed, "First seed of the range");
  bench->add_option("--planners", planners, "Comma-separated list of ibbt, rrbt");
  bench->add_option("--threads", threads, "Parallel planner runs")->check(CLI::PositiveNumber);
  bench->add_option("--out", out_dir, "Output directory");
  bench_ov.add_to(bench, false);

  std::string result_path, svg_out;
  CLI::App* render = app.add_subcommand("render", "Render a result JSON to SVG");
  render->add_option("--result", result_path, "Result JSON from `plan`")->required();
  render->add_option("--out", svg_out, "SVG output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*plan) return run_plan(scenario, plan_ov, out_dir);
    if (*bench) return run_bench(scenario, seeds, first_seed, planners, threads, bench_ov, out_dir);
    if (*render) return run_render(result_path, svg_out);
  } catch (const ScenarioValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ScenarioParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

#include "ibbt/benchmark.hpp"

#include "ibbt/result_io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <ostream>
#include <thread>

namespace ibbt {

using nlohmann::json;

namespace {

json num(double v) {
  if (std::isfinite(v)) return round12(v);
  return "inf";
}

}  // namespace

double median(std::vector<double> v) {
  if (v.empty()) return kInf;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  const double a = v[n / 2 - 1], b = v[n / 2];
  return (a == kInf || b == kInf) ? (a == kInf ? kInf : b) : 0.5 * (a + b);
}

BenchmarkRecord run_single(const Scenario& scenario, PlannerConfig config) {
  BenchmarkRecord rec;
  rec.planner = config.mode;
  rec.seed = config.seed;
  Planner planner(scenario, config);
  const PlanResult r = planner.run([&](const ProgressEvent& ev, const Planner&) {
    if (ev.kind == ProgressEvent::Kind::Solution && rec.first_solution_cost == kInf) {
      rec.first_solution_seconds = ev.elapsed;
      rec.first_solution_cost = ev.best_cost;
      rec.first_solution_pops = ev.stats.queue_pops;
      rec.first_solution_nodes = ev.stats.nodes_created;
    }
  });
  rec.final_cost = r.cost;
  rec.trace = r.anytime_trace;
  rec.stats = r.stats;
  return rec;
}

BenchmarkReport run_benchmark(const Scenario& scenario, const PlannerConfig& base,
                              const std::vector<std::uint64_t>& seeds, const std::vector<PlannerMode>& planners,
                              int threads) {
  struct Job {
    PlannerMode mode;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (PlannerMode m : planners)
    for (std::uint64_t s : seeds) jobs.push_back({m, s});

  BenchmarkReport report;
  report.records.resize(jobs.size());
  auto run_job = [&](std::size_t i) {
    PlannerConfig c = base;
    c.mode = jobs[i].mode;
    c.seed = jobs[i].seed;
    report.records[i] = run_single(scenario, c);
  };
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) run_job(i);
      });
    for (auto& th : pool) th.join();
  }

  for (PlannerMode m : planners) {
    BenchmarkSummary s;
    s.planner = m;
    std::vector<double> t, c, pops, fin;
    for (const auto& r : report.records) {
      if (r.planner != m) continue;
      ++s.runs;
      if (r.first_solution_cost < kInf) ++s.solved;
      t.push_back(r.first_solution_seconds);
      c.push_back(r.first_solution_cost);
      pops.push_back(r.first_solution_cost < kInf ? static_cast<double>(r.first_solution_pops) : kInf);
      fin.push_back(r.final_cost);
    }
    s.median_first_solution_seconds = median(t);
    s.median_first_solution_cost = median(c);
    s.median_first_solution_pops = median(pops);
    s.median_final_cost = median(fin);
    report.summaries.push_back(s);
  }
  return report;
}

json report_to_json(const BenchmarkReport& report) {
  json records = json::array();
  for (const auto& r : report.records) {
    json trace = json::array();
    for (const auto& t : r.trace) trace.push_back({{"wall_s", num(t.wall_seconds)}, {"batch", t.batch}, {"cost", num(t.cost)}});
    records.push_back({{"planner", std::string(to_string(r.planner))},
                       {"seed", r.seed},
                       {"first_solution_seconds", num(r.first_solution_seconds)},
                       {"first_solution_cost", num(r.first_solution_cost)},
                       {"first_solution_pops", r.first_solution_pops},
                       {"first_solution_nodes", r.first_solution_nodes},
                       {"final_cost", num(r.final_cost)},
                       {"trace", std::move(trace)},
                       {"batches", r.stats.batches},
                       {"vertices", r.stats.vertices},
                       {"edges", r.stats.edges},
                       {"nodes_created", r.stats.nodes_created},
                       {"queue_pops", r.stats.queue_pops},
                       {"propagations", r.stats.propagations}});
  }
  json summaries = json::array();
  for (const auto& s : report.summaries)
    summaries.push_back({{"planner", std::string(to_string(s.planner))},
                         {"runs", s.runs},
                         {"solved", s.solved},
                         {"median_first_solution_seconds", num(s.median_first_solution_seconds)},
                         {"median_first_solution_cost", num(s.median_first_solution_cost)},
                         {"median_first_solution_pops", num(s.median_first_solution_pops)},
                         {"median_final_cost", num(s.median_final_cost)}});
  return {{"records", std::move(records)}, {"summary", std::move(summaries)}};
}

void write_benchmark_csv(std::ostream& os, const BenchmarkReport& report) {
  os << "planner,seed,wall_s,batch,cost\n";
  char buf[128];
  for (const auto& r : report.records)
    for (const auto& t : r.trace) {
      std::snprintf(buf, sizeof buf, "%s,%llu,%.12g,%d,%.12g\n", std::string(to_string(r.planner)).c_str(),
                    static_cast<unsigned long long>(r.seed), t.wall_seconds, t.batch, t.cost);
      os << buf;
    }
}

}  // namespace ibbt

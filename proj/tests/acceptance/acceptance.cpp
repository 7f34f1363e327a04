// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "ibbt/belief.hpp"
#include "ibbt/benchmark.hpp"
#include "ibbt/dynamics.hpp"
#include "ibbt/graph.hpp"
#include "ibbt/linalg.hpp"
#include "ibbt/planner.hpp"
#include "ibbt/result_io.hpp"
#include "ibbt/scenario_io.hpp"
#include "ibbt/simulation.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

using namespace ibbt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double min_eig(const Mat& m) { return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (m + m.transpose())).eigenvalues()(0); }

ScenarioFile fixture(const std::string& name) { return load_scenario(oracle::scenario_path(name)); }

// ---------------------------------------------------------------------------
// 1. Covariance split holds after every filter step.

Outcome kalman_identity() {
  Rng rng(101);
  double worst_split = 0.0, worst_eig = kInf;
  for (int t = 0; t < 1000; ++t) {
    const int n = t % 2 == 0 ? 3 : 4;
    LtvStep s;
    s.A = Mat::Identity(n, n) + 0.4 * oracle::random_matrix(rng, n, n);
    s.B = oracle::random_matrix(rng, n, 2);
    s.G = oracle::random_matrix(rng, n, n, 0.3);
    s.C = Mat::Identity(n, n) + 0.2 * oracle::random_matrix(rng, n, n);
    s.D = oracle::random_positive_diagonal(rng, n, 0.01, 2.0);
    s.dt = 0.1;
    const Mat K = oracle::random_matrix(rng, 2, n, 0.5);
    const Mat Ph = oracle::random_psd(rng, n, 1 + t % n, 0.5);
    const Mat Pt = oracle::random_psd(rng, n, n, 0.5);
    const KalmanStepResult r = kalman_step(s, K, Ph, Pt);
    worst_split = std::max(worst_split, (r.P - (r.P_hat + r.P_tilde)).norm());
    worst_eig = std::min({worst_eig, min_eig(r.P), min_eig(r.P_hat), min_eig(r.P_tilde)});
  }
  return {worst_split < 1e-9 && worst_eig >= -1e-9,
          "max |P - (P_hat + P_tilde)|_F = " + fmt("%.3g", worst_split) + ", min eigenvalue = " +
              fmt("%.3g", worst_eig)};
}

// ---------------------------------------------------------------------------
// 2. Monte-Carlo covariance of closed-loop rollouts against the prediction.

Outcome closed_loop_covariance() {
  Scenario sc = oracle::open_scenario(10, 4);
  sc.info_regions.push_back(make_rectangle(1.6, 0.0, 2.2, 4.0));
  const StateVec xa = (Vec(4) << 1, 2, 0, 0).finished();
  std::optional<Edge> edge;
  for (double d = 0.2; d < 3.0 && !(edge && edge->num_steps() == 20); d += 0.005)
    edge = connect(sc.model, xa, (Vec(4) << 1 + d, 2.2, 0, 0).finished());
  if (!edge || edge->num_steps() != 20) return {false, "no 20-step edge found"};

  const Mat Pt0 = 0.01 * Mat::Identity(4, 4);
  std::vector<Mat> P{Pt0};
  Mat Ph = Mat::Zero(4, 4), Pt = Pt0;
  for (std::size_t k = 0; k < edge->num_steps(); ++k) {
    LtvStep step = edge->steps[k];
    step.D = measurement_noise_at(position_of(edge->states[k + 1]), sc);
    const KalmanStepResult r = kalman_step(step, edge->gains[k], Ph, Pt);
    Ph = r.P_hat;
    Pt = r.P_tilde;
    P.push_back(r.P);
  }

  const int runs = 10000;
  const std::size_t N = edge->states.size();
  std::vector<Vec> sum(N, Vec::Zero(4));
  std::vector<Mat> outer(N, Mat::Zero(4, 4));
  const Eigen::LLT<Mat> chol(Pt0);
  Rng rng(202);
  std::normal_distribution<double> normal;
  for (int i = 0; i < runs; ++i) {
    Vec z(4);
    for (int j = 0; j < 4; ++j) z(j) = normal(rng);
    const StateVec x0 = xa + chol.matrixL() * z;
    const ClosedLoopRollout r = simulate_closed_loop(sc.model, *edge, sc, x0, Vec::Zero(4), Pt0, rng);
    for (std::size_t k = 0; k < N; ++k) {
      const Vec e = r.states[k] - edge->states[k];
      sum[k] += e;
      outer[k] += e * e.transpose();
    }
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const Vec mean = sum[k] / runs;
    const Mat cov = (outer[k] - runs * mean * mean.transpose()) / (runs - 1);
    worst = std::max(worst, (cov - P[k]).norm() / P[k].norm());
  }
  return {worst < 0.1, "20-step edge, 10^4 rollouts, worst relative Frobenius error " + fmt("%.4f", worst)};
}

// ---------------------------------------------------------------------------
// 3. Value iteration against Dijkstra.

Outcome heuristic_exactness() {
  Rng rng(303);
  int mismatches = 0;
  std::size_t checked = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>(oracle::uniform(rng, 0, 199));
    const double density = oracle::uniform(rng, 1.0, 6.0) / n;
    Graph g;
    for (int i = 0; i < n; ++i) g.add_vertex(StateVec::Zero(4));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (a != b && oracle::uniform(rng, 0, 1) < density) {
          Edge e;
          e.from = a;
          e.to = b;
          e.nominal_cost = oracle::uniform(rng, 0.1, 10.0);
          g.add_edge(std::move(e));
        }
    const int goal = static_cast<int>(oracle::uniform(rng, 0, n));
    value_iteration(g, goal);
    const std::vector<double> d = oracle::shortest_to_goal(n, oracle::edge_list(g), goal);
    for (int v = 0; v < n; ++v, ++checked)
      if (!(g.vertex(v).h == d[v])) ++mismatches;
  }
  return {mismatches == 0, std::to_string(checked) + " vertices over 100 graphs, " + std::to_string(mismatches) +
                               " mismatches"};
}

// ---------------------------------------------------------------------------
// 4. Dubins lengths against the word-enumeration oracle.

Outcome dubins_steering() {
  ModelSpec m = default_model(ModelKind::Dubins);
  m.dubins_turn_radius = 0.5;
  Rng rng(404);
  double worst = 0.0;
  int shorter_than_euclid = 0, failures = 0;
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Vector3d a(oracle::uniform(rng, 0, 10), oracle::uniform(rng, 0, 10), oracle::uniform(rng, -M_PI, M_PI));
    const Eigen::Vector3d b(oracle::uniform(rng, 0, 10), oracle::uniform(rng, 0, 10), oracle::uniform(rng, -M_PI, M_PI));
    const auto e = connect(m, a, b);
    if (!e) {
      ++failures;
      continue;
    }
    worst = std::max(worst, std::abs(e->path_length - oracle::dubins_length(a, b, m.dubins_turn_radius)));
    if (e->path_length < (b - a).head<2>().norm() - 1e-12) ++shorter_than_euclid;
  }
  return {failures == 0 && worst < 1e-6 && shorter_than_euclid == 0,
          "1000 pairs, max length error " + fmt("%.3g", worst) + ", below Euclidean " +
              std::to_string(shorter_than_euclid) + ", connect failures " + std::to_string(failures)};
}

// ---------------------------------------------------------------------------
// 5. Shared sample stream: same solution, fewer belief nodes.

double goal_cost(const Planner& p) {
  const NodeId g = p.best_goal_node();
  return g == kNoNode ? kInf : p.tree().node(g).c;
}

Outcome same_samples() {
  const ScenarioFile f = fixture("double_integrator_env1.json");
  PlannerConfig c = f.config;
  c.max_seconds = 0;
  c.max_batches = 40;
  auto drawn = std::make_shared<std::vector<StateVec>>();
  auto rng = std::make_shared<Rng>(f.config.seed);
  const Scenario sc = f.scenario;
  Planner ib(sc, c, [drawn, rng, &sc] {
    drawn->push_back(sample_free(sc, *rng));
    return drawn->back();
  });
  while (!ib.budget_exhausted()) {
    const bool flagged = ib.iterate();
    if (flagged && ib.best_goal_node() != kNoNode) break;
  }
  const double informed = goal_cost(ib);
  if (!std::isfinite(informed)) return {false, "informed planner found no solution in 40 batches"};

  PlannerConfig cr = c;
  cr.mode = PlannerMode::RRBT;
  cr.max_batches = static_cast<int>(drawn->size());
  auto next = std::make_shared<std::size_t>(0);
  Planner rr(sc, cr, [drawn, next] { return drawn->at((*next)++); });
  for (int i = 0; i < cr.max_batches; ++i) rr.iterate();
  const double exhaustive = goal_cost(rr);
  const std::size_t ni = ib.tree().created(), nr = rr.tree().created();
  return {std::abs(informed - exhaustive) <= 1e-6 && ni < nr,
          std::to_string(drawn->size()) + " shared samples, cost " + fmt("%.9g", informed) + " vs " +
              fmt("%.9g", exhaustive) + ", belief nodes " + std::to_string(ni) + " vs " + std::to_string(nr)};
}

// ---------------------------------------------------------------------------
// Benchmark runs shared by criteria 6 and 8.

struct Runs {
  std::vector<BenchmarkRecord> informed, baseline;
};

Runs run_seeds(const Scenario& sc, PlannerConfig c, int seeds) {
  Runs out;
  for (int s = 1; s <= seeds; ++s) {
    c.seed = static_cast<std::uint64_t>(s);
    c.mode = PlannerMode::IBBT;
    out.informed.push_back(run_single(sc, c));
    c.mode = PlannerMode::RRBT;
    out.baseline.push_back(run_single(sc, c));
  }
  return out;
}

double median_of(const std::vector<BenchmarkRecord>& rs, const std::function<double(const BenchmarkRecord&)>& f) {
  std::vector<double> v;
  for (const auto& r : rs) v.push_back(f(r));
  return median(std::move(v));
}

double first_time(const BenchmarkRecord& r) { return r.first_solution_seconds; }
double first_pops(const BenchmarkRecord& r) {
  return std::isfinite(r.first_solution_cost) ? static_cast<double>(r.first_solution_pops) : kInf;
}

/// Best cost reached by wall time t.
double cost_at(const BenchmarkRecord& r, double t) {
  double c = kInf;
  for (const auto& p : r.trace)
    if (p.wall_seconds <= t) c = std::min(c, p.cost);
  return c;
}

bool strictly_decreasing(const std::vector<BenchmarkRecord>& rs) {
  for (const auto& r : rs)
    for (std::size_t i = 1; i < r.trace.size(); ++i)
      if (!(r.trace[i].cost < r.trace[i - 1].cost)) return false;
  return true;
}

std::string speed_line(const char* name, const Runs& r, bool& ok) {
  const double ti = median_of(r.informed, first_time), tr = median_of(r.baseline, first_time);
  const double pi = median_of(r.informed, first_pops), pr = median_of(r.baseline, first_pops);
  ok = ok && std::isfinite(ti) && ti <= tr && pi < pr;
  return std::string(name) + ": median first-solution time " + fmt("%.4g", ti) + " s vs " + fmt("%.4g", tr) +
         " s, pops " + fmt("%.6g", pi) + " vs " + fmt("%.6g", pr);
}

constexpr int kSeeds = 20;
constexpr double kFirstSolutionBudget = 5.0;
constexpr double kAnytimeBudget = 4.0;

// ---------------------------------------------------------------------------
// 7. Information-seeking solution on env-1.

struct SolvedRun {
  std::unique_ptr<Planner> planner;
  PlanResult result;
};

SolvedRun solve(const Scenario& sc, PlannerConfig c) {
  SolvedRun s;
  s.planner = std::make_unique<Planner>(sc, c);
  s.result = s.planner->run();
  return s;
}

Outcome information_seeking(const SolvedRun& run) {
  const Planner& p = *run.planner;
  const Scenario& sc = p.scenario();
  const auto direct = connect(sc.model, sc.start, sc.goal);
  if (!direct) return {false, "start and goal cannot be connected"};
  Edge e = *direct;
  e.id = 0;
  e.from = p.start_vertex();
  const PropagateResult r = propagate_edge(e, p.tree().node(p.root()), sc, p.propagate_options());
  const Infeasible* blocked = std::get_if<Infeasible>(&r);
  std::string detail = blocked ? "direct edge infeasible at step " + std::to_string(blocked->step) + " (p = " +
                                     fmt("%.3f", blocked->probability) + ")"
                               : "direct edge is feasible";
  if (!run.result.solved()) return {false, detail + ", no solution"};

  const std::vector<StateVec> traj = solution_trajectory(p.graph(), run.result.solution_path);
  std::size_t first_info = traj.size();
  for (std::size_t k = 0; k < traj.size() && first_info == traj.size(); ++k)
    for (const auto& region : sc.info_regions)
      if (region.contains(position_of(traj[k]))) first_info = k;
  const bool visits = first_info + 1 < traj.size();
  detail += visits ? ", solution enters an info region at step " + std::to_string(first_info) + " of " +
                         std::to_string(traj.size())
                   : ", solution never enters an info region";
  return {blocked && visits, detail + ", cost " + fmt("%.6g", run.result.cost)};
}

// ---------------------------------------------------------------------------
// 9. Replay every solution edge with fresh Monte-Carlo samples.

struct Replay {
  double worst_margin = -kInf;  // max over steps of p - bound
  double worst_p = 0.0;
  std::size_t steps = 0;
  double covariance_mismatch = 0.0;
};

Replay replay_solution(const SolvedRun& run, Rng& rng) {
  const Planner& p = *run.planner;
  const Scenario& sc = p.scenario();
  const ChanceConfig& ch = p.config().chance;
  const double bound = ch.delta + 3.0 * std::sqrt(ch.delta * (1.0 - ch.delta) / ch.mc_samples);
  Replay out;
  const auto& path = run.result.solution_path;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Edge& e = p.graph().edge(path[i].edge);
    Mat Pt = path[i - 1].P_tilde;
    Mat Ph = clamp_psd(path[i - 1].P - path[i - 1].P_tilde);
    Mat P = path[i - 1].P;
    for (std::size_t k = 0; k < e.num_steps(); ++k) {
      LtvStep step = e.steps[k];
      step.D = measurement_noise_at(position_of(e.states[k + 1]), sc);
      const KalmanStepResult r = kalman_step(step, e.gains[k], Ph, Pt);
      Ph = r.P_hat;
      Pt = r.P_tilde;
      P = r.P;
      const double prob =
          collision_probability(position_of(e.states[k + 1]), P.topLeftCorner<2, 2>(), sc, 100000, rng);
      out.worst_margin = std::max(out.worst_margin, prob - bound);
      out.worst_p = std::max(out.worst_p, prob);
      ++out.steps;
    }
    out.covariance_mismatch = std::max(out.covariance_mismatch, (P - path[i].P).norm() / path[i].P.norm());
  }
  return out;
}

/// Solves and replays one run at a time; a planner holding a 10 s graph takes
/// over a gigabyte, so only one is kept alive.
struct SoundnessCase {
  std::string name;
  std::function<SolvedRun()> solve;
};

Outcome chance_soundness(const std::vector<SoundnessCase>& cases) {
  Rng rng(909);
  bool ok = true;
  std::string detail;
  int solutions = 0;
  for (const auto& c : cases) {
    const SolvedRun run = c.solve();
    if (!run.result.solved()) continue;
    ++solutions;
    const Replay r = replay_solution(run, rng);
    ok = ok && r.worst_margin < 0.0 && r.covariance_mismatch < 1e-9;
    detail += (detail.empty() ? "" : "; ") + c.name + ": " + std::to_string(r.steps) + " steps, max p " +
              fmt("%.4f", r.worst_p) + ", margin " + fmt("%.4f", r.worst_margin);
  }
  if (solutions == 0) return {false, "no solutions to replay"};
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// 10. Byte-identical result documents.

Outcome determinism() {
  const ScenarioFile f = fixture("double_integrator_env1.json");
  PlannerConfig c = f.config;
  c.max_seconds = 0;
  c.max_batches = 3;
  auto once = [&] {
    Planner p(f.scenario, c);
    const PlanResult r = p.run();
    return write_result(p, r);
  };
  const std::string a = once(), b = once();
  return {a == b, std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "different")};
}

}  // namespace

/// Runs every criterion, or only the ids given on the command line.
int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  int failed = 0, ran = 0;
  auto report = [&](int id, const char* title, const std::function<Outcome()>& fn) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) return;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, "kalman covariance split", kalman_identity);
  report(2, "closed-loop covariance", closed_loop_covariance);
  report(3, "heuristic exactness", heuristic_exactness);
  report(4, "dubins steering", dubins_steering);
  report(5, "same-samples equivalence", same_samples);

  const ScenarioFile env1 = fixture("double_integrator_env1.json");
  const ScenarioFile env2 = fixture("double_integrator_env2.json");
  const ScenarioFile dub = fixture("dubins_env.json");

  Runs env2_runs, dubins_runs;
  auto anytime_runs = [&](const ScenarioFile& f) {
    PlannerConfig c = f.config;
    c.max_seconds = kAnytimeBudget;
    c.max_batches = 0;
    return run_seeds(f.scenario, c, kSeeds);
  };
  report(6, "relative speed", [&] {
    PlannerConfig c1 = env1.config;
    c1.max_seconds = kFirstSolutionBudget;
    c1.max_batches = 0;
    c1.stop_on_first_solution = true;
    const Runs r1 = run_seeds(env1.scenario, c1, kSeeds);
    env2_runs = anytime_runs(env2);
    bool ok = true;
    const std::string a = speed_line("env-1", r1, ok);
    const std::string b = speed_line("env-2", env2_runs, ok);
    return Outcome{ok, a + "; " + b};
  });

  SolvedRun env1_solution;
  report(7, "information seeking", [&] {
    env1_solution = solve(env1.scenario, env1.config);
    return information_seeking(env1_solution);
  });

  report(8, "anytime convergence", [&] {
    if (env2_runs.informed.empty()) env2_runs = anytime_runs(env2);
    dubins_runs = anytime_runs(dub);
    bool ok = true;
    std::string detail;
    for (const auto& [name, runs] : {std::pair<const char*, const Runs*>{"env-2", &env2_runs}, {"dubins", &dubins_runs}}) {
      const bool monotone = strictly_decreasing(runs->informed) && strictly_decreasing(runs->baseline);
      int worse = 0, checkpoints = 0;
      double last_i = kInf, last_r = kInf;
      for (double t = 0.25; t <= kAnytimeBudget + 1e-9; t += 0.25, ++checkpoints) {
        last_i = median_of(runs->informed, [t](const BenchmarkRecord& r) { return cost_at(r, t); });
        last_r = median_of(runs->baseline, [t](const BenchmarkRecord& r) { return cost_at(r, t); });
        if (!(last_i <= last_r + 1e-9)) ++worse;
      }
      ok = ok && monotone && worse == 0;
      detail += std::string(detail.empty() ? "" : "; ") + name + ": " + (monotone ? "strictly decreasing" : "NOT monotone") +
                ", IBBT above RRBT at " + std::to_string(worse) + "/" + std::to_string(checkpoints) +
                " checkpoints, final medians " + fmt("%.5g", last_i) + " vs " + fmt("%.5g", last_r);
    }
    return Outcome{ok, detail};
  });

  report(9, "chance-constraint soundness", [&] {
    PlannerConfig baseline = env1.config;
    baseline.mode = PlannerMode::RRBT;
    baseline.max_seconds = kFirstSolutionBudget;
    return chance_soundness({
        {"env-1 IBBT",
         [&] { return env1_solution.planner ? std::move(env1_solution) : solve(env1.scenario, env1.config); }},
        {"env-1 RRBT", [&] { return solve(env1.scenario, baseline); }},
        {"env-2 IBBT", [&] { return solve(env2.scenario, env2.config); }},
        {"dubins IBBT", [&] { return solve(dub.scenario, dub.config); }},
    });
  });

  report(10, "determinism", determinism);

  std::printf("%d of %d criteria failed\n", failed, ran);
  return failed == 0 ? 0 : 1;
}

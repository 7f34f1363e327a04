#include "ibbt/result_io.hpp"

#include "ibbt/scenario_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>

namespace ibbt {

using nlohmann::json;

namespace {

json num(double v) {
  if (std::isfinite(v)) return round12(v);
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

json vec(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

json mat(const Mat& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) rows.push_back(vec(m.row(r).transpose()));
  return rows;
}

json stats_json(const PlanStats& s) {
  return {{"batches", s.batches},
          {"vertices", s.vertices},
          {"edges", s.edges},
          {"nodes_created", s.nodes_created},
          {"nodes_pruned", s.nodes_pruned},
          {"nodes_alive", s.nodes_alive},
          {"propagations", s.propagations},
          {"infeasible_propagations", s.infeasible_propagations},
          {"queue_pops", s.queue_pops}};
}

}  // namespace

double round12(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

std::vector<StateVec> solution_trajectory(const Graph& graph, const std::vector<PathStep>& path) {
  std::vector<StateVec> out;
  if (path.empty()) return out;
  out.push_back(path.front().x);
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Edge& e = graph.edge(path[i].edge);
    out.insert(out.end(), e.states.begin() + 1, e.states.end());
  }
  return out;
}

json result_to_json(const Planner& planner, const PlanResult& result) {
  json j;
  j["scenario"] = scenario_to_json({planner.scenario(), planner.config()});
  j["planner"] = std::string(to_string(planner.config().mode));
  j["seed"] = planner.config().seed;
  j["solved"] = result.solved();
  j["cost"] = num(result.cost);

  json path = json::array();
  for (const auto& s : result.solution_path)
    path.push_back({{"vertex", s.vertex},
                    {"edge", s.edge},
                    {"node", s.node},
                    {"x", vec(s.x)},
                    {"P", mat(s.P)},
                    {"P_tilde", mat(s.P_tilde)},
                    {"c", num(s.c)}});
  j["path"] = std::move(path);

  json traj = json::array();
  for (const auto& x : solution_trajectory(planner.graph(), result.solution_path)) traj.push_back(vec(x));
  j["trajectory"] = std::move(traj);

  json trace = json::array();
  for (const auto& t : result.anytime_trace) trace.push_back({{"batch", t.batch}, {"cost", num(t.cost)}});
  j["anytime"] = std::move(trace);
  j["stats"] = stats_json(result.stats);

  const Graph& g = planner.graph();
  json verts = json::array();
  for (const auto& v : g.vertices()) verts.push_back(vec(v.x));
  json edges = json::array();
  for (const auto& e : g.edges()) edges.push_back({e.from, e.to});
  j["graph"] = {{"vertices", std::move(verts)}, {"edges", std::move(edges)}};

  json tree = json::array();
  planner.tree().for_each([&](const BeliefNode& n) {
    const Vec2 p = position_of(g.vertex(n.vertex).x);
    tree.push_back({num(p.x()), num(p.y()), num(n.P(0, 0)), num(n.P(0, 1)), num(n.P(1, 1))});
  });
  j["tree"] = std::move(tree);
  return j;
}

std::string write_result(const Planner& planner, const PlanResult& result) {
  return result_to_json(planner, result).dump(2) + "\n";
}

void write_anytime_csv(std::ostream& os, const std::vector<TracePoint>& trace) {
  os << "wall_s,batch,cost\n";
  char buf[96];
  for (const auto& t : trace) {
    std::snprintf(buf, sizeof buf, "%.12g,%d,%.12g\n", t.wall_seconds, t.batch, t.cost);
    os << buf;
  }
}

}  // namespace ibbt

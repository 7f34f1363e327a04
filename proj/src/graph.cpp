#include "ibbt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace ibbt {

VertexId Graph::add_vertex(StateVec x) {
  Vertex v;
  v.id = static_cast<VertexId>(vertices_.size());
  v.x = std::move(x);
  vertices_.push_back(std::move(v));
  out_.emplace_back();
  in_.emplace_back();
  return vertices_.back().id;
}

EdgeId Graph::add_edge(Edge e) {
  const auto nv = static_cast<VertexId>(vertices_.size());
  if (e.from < 0 || e.from >= nv || e.to < 0 || e.to >= nv) throw std::invalid_argument("add_edge: unknown endpoint");
  if (e.from == e.to) throw std::invalid_argument("add_edge: self-loop");
  if (!(e.nominal_cost >= 0.0)) throw std::invalid_argument("add_edge: negative edge cost");
  e.id = static_cast<EdgeId>(edges_.size());
  out_[e.from].push_back(e.id);
  in_[e.to].push_back(e.id);
  edges_.push_back(std::move(e));
  return edges_.back().id;
}

std::vector<double> Graph::heuristic_values() const {
  std::vector<double> h(vertices_.size());
  for (std::size_t i = 0; i < vertices_.size(); ++i) h[i] = vertices_[i].h;
  return h;
}

double NeighborhoodParams::radius(std::size_t n) const {
  if (n <= 1) return r_max;
  const double nn = static_cast<double>(n);
  return std::min(r_max, gamma * std::sqrt(std::log(nn) / nn));
}

NeighborhoodParams default_neighborhood(const Scenario& scenario) {
  NeighborhoodParams p;
  p.gamma = 2.5 * std::sqrt(scenario.bounds.area() / M_PI);
  p.r_max = 0.25 * scenario.bounds.diagonal();
  return p;
}

VertexId nearest(const Graph& g, const ModelSpec& model, const StateVec& x) {
  if (g.num_vertices() == 0) throw std::invalid_argument("nearest: empty graph");
  VertexId best = 0;
  double best_d = kInf;
  for (const auto& v : g.vertices()) {
    const double d = state_distance(model, v.x, x);
    if (d < best_d) {
      best_d = d;
      best = v.id;
    }
  }
  return best;
}

std::vector<VertexId> near(const Graph& g, const ModelSpec& model, const NeighborhoodParams& params,
                           const StateVec& x) {
  const double r = params.radius(g.num_vertices());
  std::vector<VertexId> out;
  for (const auto& v : g.vertices()) {
    const double d = state_distance(model, v.x, x);
    if (d <= r && state_error(model, v.x, x).norm() > 0.0) out.push_back(v.id);
  }
  return out;
}

std::vector<VertexId> rrg_batch(Graph& g, const Scenario& scenario, const NeighborhoodParams& params, int m,
                                const StateSampler& sampler) {
  if (m < 1) throw std::invalid_argument("rrg_batch: batch size must be at least 1");
  const ModelSpec& model = scenario.model;
  std::vector<VertexId> added;
  auto try_add = [&](VertexId from, VertexId to) {
    auto e = connect(model, g.vertex(from).x, g.vertex(to).x);
    if (!e || !obstacle_free(e->states, scenario)) return;
    e->from = from;
    e->to = to;
    g.add_edge(std::move(*e));
  };

  for (int i = 0; i < m; ++i) {
    const StateVec x = sampler();
    const VertexId vn = nearest(g, model, x);
    if (state_error(model, g.vertex(vn).x, x).norm() <= params.duplicate_tol) continue;
    auto e_nearest = connect(model, g.vertex(vn).x, x);
    if (!e_nearest || !obstacle_free(e_nearest->states, scenario)) continue;
    const std::vector<VertexId> v_near = near(g, model, params, x);
    const VertexId v = g.add_vertex(x);
    added.push_back(v);
    e_nearest->from = vn;
    e_nearest->to = v;
    g.add_edge(std::move(*e_nearest));
    try_add(v, vn);
    for (VertexId u : v_near) {
      if (u == vn) continue;
      try_add(u, v);
      try_add(v, u);
    }
  }
  return added;
}

namespace {

// Kahn ordering; empty when the graph has a cycle.
std::vector<VertexId> topological_order(const Graph& g) {
  const std::size_t n = g.num_vertices();
  std::vector<int> indeg(n, 0);
  for (const auto& e : g.edges()) ++indeg[e.to];
  std::vector<VertexId> order;
  order.reserve(n);
  for (std::size_t v = 0; v < n; ++v)
    if (indeg[v] == 0) order.push_back(static_cast<VertexId>(v));
  for (std::size_t head = 0; head < order.size(); ++head)
    for (EdgeId eid : g.out_edges(order[head]))
      if (--indeg[g.edge(eid).to] == 0) order.push_back(g.edge(eid).to);
  if (order.size() != n) order.clear();
  return order;
}

double backup(const Graph& g, VertexId v, const std::vector<double>& h) {
  double best = kInf;
  for (EdgeId eid : g.out_edges(v)) {
    const Edge& e = g.edge(eid);
    best = std::min(best, e.nominal_cost + h[e.to]);
  }
  return best;
}

}  // namespace

void value_iteration(Graph& g, VertexId goal) {
  const std::size_t n = g.num_vertices();
  if (goal < 0 || static_cast<std::size_t>(goal) >= n) throw std::invalid_argument("value_iteration: unknown goal");
  std::vector<double> h = g.heuristic_values();
  h[goal] = 0.0;

  const std::vector<VertexId> topo = topological_order(g);
  if (!topo.empty()) {
    for (auto it = topo.rbegin(); it != topo.rend(); ++it)
      if (*it != goal) h[*it] = backup(g, *it, h);
  } else {
    // Gauss-Seidel sweeps, cheapest vertices first. Warm values from an
    // earlier, smaller graph are upper bounds, so the sweeps descend to the
    // fixed point; anything else falls back to a cold start.
    std::vector<VertexId> order(n);
    bool restarted = false;
    std::size_t sweeps = 0;
    for (;;) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](VertexId a, VertexId b) { return h[a] < h[b]; });
      bool changed = false;
      for (VertexId v : order) {
        if (v == goal) continue;
        const double nh = backup(g, v, h);
        if (nh != h[v]) {
          h[v] = nh;
          changed = true;
        }
      }
      if (!changed) break;
      if (++sweeps > n + 1) {
        if (restarted) throw std::logic_error("value_iteration: failed to converge");
        std::fill(h.begin(), h.end(), kInf);
        h[goal] = 0.0;
        restarted = true;
        sweeps = 0;
      }
    }
  }
  for (std::size_t v = 0; v < n; ++v) g.vertices()[v].h = h[v];
}

void write_graph_dump(std::ostream& os, const Graph& g) {
  const auto old_precision = os.precision(12);
  for (const auto& v : g.vertices()) {
    os << "V " << v.id;
    for (int i = 0; i < v.x.size(); ++i) os << ' ' << v.x(i);
    os << ' ' << v.h << '\n';
  }
  for (const auto& e : g.edges())
    os << "E " << e.id << ' ' << e.from << ' ' << e.to << ' ' << e.nominal_cost << ' ' << e.num_steps() << '\n';
  os.precision(old_precision);
}

}  // namespace ibbt

#pragma once

#include "ibbt/dynamics.hpp"
#include "ibbt/environment.hpp"
#include "ibbt/types.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace ibbt {

struct Vertex {
  VertexId id = kNoVertex;
  StateVec x;
  std::vector<NodeId> nodes;  // belief nodes attached to this vertex
  double h = kInf;            // nominal cost-to-go
};

/// Directed graph of nominal trajectories.
class Graph {
 public:
  VertexId add_vertex(StateVec x);
  /// Takes ownership of `e`, assigning its id. Throws on self-loops, unknown
  /// endpoints or negative cost.
  EdgeId add_edge(Edge e);

  const Vertex& vertex(VertexId v) const { return vertices_.at(v); }
  Vertex& vertex(VertexId v) { return vertices_.at(v); }
  const Edge& edge(EdgeId e) const { return edges_.at(e); }

  const std::vector<Vertex>& vertices() const { return vertices_; }
  std::vector<Vertex>& vertices() { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }

  const std::vector<EdgeId>& out_edges(VertexId v) const { return out_.at(v); }
  const std::vector<EdgeId>& in_edges(VertexId v) const { return in_.at(v); }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  std::vector<double> heuristic_values() const;

 private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> out_;
  std::vector<std::vector<EdgeId>> in_;
};

/// Near-radius constants: r(n) = min(r_max, gamma * (log n / n)^(1/2)).
struct NeighborhoodParams {
  double gamma = 1.0;
  double r_max = 1.0;
  double duplicate_tol = 1e-9;

  double radius(std::size_t n) const;
};

NeighborhoodParams default_neighborhood(const Scenario& scenario);

/// Vertex minimizing the model distance; ties go to the lowest id.
VertexId nearest(const Graph& g, const ModelSpec& model, const StateVec& x);

/// Vertices within r(|V|) of `x`, excluding exact duplicates of `x`.
std::vector<VertexId> near(const Graph& g, const ModelSpec& model, const NeighborhoodParams& params,
                           const StateVec& x);

using StateSampler = std::function<StateVec()>;

/// One RRG-D call: draws `m` samples and grows the nominal-trajectory graph.
/// Returns the ids of the vertices added.
std::vector<VertexId> rrg_batch(Graph& g, const Scenario& scenario, const NeighborhoodParams& params, int m,
                                const StateSampler& sampler);

/// Exact nominal shortest cost-to-go to `goal` for every vertex, warm-started
/// from the vertices' current h values (goal pinned at 0).
void value_iteration(Graph& g, VertexId goal);

/// Plain-text dump: one `V` line per vertex then one `E` line per edge.
void write_graph_dump(std::ostream& os, const Graph& g);

}  // namespace ibbt

#pragma once

#include "ibbt/belief.hpp"
#include "ibbt/graph.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ibbt {

enum class PlannerMode { IBBT, RRBT };

std::string_view to_string(PlannerMode m);
PlannerMode planner_mode_from_string(std::string_view s);

struct PlannerConfig {
  PlannerMode mode = PlannerMode::IBBT;
  int batch_size = 50;  // forced to 1 in RRBT mode
  double eps_dominance = 1e-6;
  double max_seconds = 10.0;  // <= 0 disables the wall-clock budget
  int max_batches = 0;        // <= 0 disables the batch budget
  bool stop_on_first_solution = false;
  std::uint64_t seed = 1;
  double lambda_P = 0.1;
  ChanceConfig chance;
  std::optional<double> near_gamma;  // overrides of the default neighborhood
  std::optional<double> near_r_max;

  void validate() const;
};

/// Live belief nodes addressed by id; ids are never reused.
class BeliefTree {
 public:
  NodeId insert(BeliefNode n);
  void erase(NodeId id);
  bool alive(NodeId id) const { return id >= 0 && static_cast<std::size_t>(id) < nodes_.size() && alive_[id]; }
  const BeliefNode& node(NodeId id) const { return nodes_.at(id); }
  BeliefNode& node(NodeId id) { return nodes_.at(id); }
  std::size_t size() const { return live_; }
  std::size_t created() const { return nodes_.size(); }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (alive_[i]) fn(nodes_[i]);
  }

 private:
  std::vector<BeliefNode> nodes_;
  std::vector<bool> alive_;
  std::size_t live_ = 0;
};

/// Priority queue of belief-node ids keyed by (f, c, id).
class BeliefQueue {
 public:
  void push(const BeliefNode& n);
  NodeId pop_best();
  bool erase(NodeId id);
  bool contains(NodeId id) const { return keys_.count(id) != 0; }
  bool empty() const { return order_.empty(); }
  std::size_t size() const { return order_.size(); }
  /// f of the best entry; +inf when empty.
  double best_f() const;
  /// Removes every entry with f > cost.
  std::size_t prune(double cost);
  /// Re-keys every entry from the tree (after heuristic refresh).
  void rekey(const BeliefTree& tree);
  std::vector<NodeId> ids() const;

 private:
  struct Key {
    double f;
    double c;
    NodeId id;
    bool operator<(const Key& o) const {
      if (f != o.f) return f < o.f;
      if (c != o.c) return c < o.c;
      return id < o.id;
    }
  };
  std::set<Key> order_;
  std::unordered_map<NodeId, Key> keys_;
};

/// Free-function forms of the queue primitives.
NodeId pop_best(BeliefQueue& q);
std::size_t prune_queue(BeliefQueue& q, double cost);

struct PlanStats {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::size_t nodes_created = 0;
  std::size_t nodes_pruned = 0;
  std::size_t nodes_alive = 0;
  std::size_t propagations = 0;
  std::size_t infeasible_propagations = 0;
  std::size_t queue_pops = 0;
  int batches = 0;
};

struct PathStep {
  VertexId vertex = kNoVertex;
  EdgeId edge = kNoEdge;  // edge entering this vertex; kNoEdge at the root
  NodeId node = kNoNode;
  StateVec x;
  Mat P;
  Mat P_tilde;
  double c = 0.0;
};

struct TracePoint {
  double wall_seconds = 0.0;
  int batch = 0;
  double cost = kInf;
};

struct PlanResult {
  std::vector<PathStep> solution_path;
  double cost = kInf;
  std::vector<TracePoint> anytime_trace;
  PlanStats stats;
  double first_solution_seconds = kInf;

  bool solved() const { return !solution_path.empty(); }
};

struct ProgressEvent {
  enum class Kind { Batch, Solution, Finished } kind = Kind::Batch;
  int batch = 0;
  double elapsed = 0.0;
  double best_cost = kInf;
  PlanStats stats;
};

class Planner;
using ProgressCallback = std::function<void(const ProgressEvent&, const Planner&)>;

/// Outcome of AppendBelief: the inserted id (or kNoNode) and the ids removed.
struct AppendResult {
  NodeId accepted = kNoNode;
  std::vector<NodeId> removed;
};

/// Inserts `n_new` at its vertex unless an incumbent dominates or equals it;
/// incumbents dominated by `n_new` are removed with their subtrees, from the
/// vertex sets and from `queue`.
AppendResult append_belief(Graph& graph, BeliefTree& tree, BeliefQueue& queue, BeliefNode n_new, double eps);

/// Anytime belief-space planner running either the informed batch search or
/// the exhaustive one-sample-at-a-time baseline.
class Planner {
 public:
  Planner(const Scenario& scenario, PlannerConfig config);
  Planner(const Scenario& scenario, PlannerConfig config, StateSampler sampler);

  /// Runs until the configured budget is spent.
  PlanResult run(const ProgressCallback& on_progress = {});

  /// One outer iteration (one batch, or one sample in baseline mode).
  /// Returns true when the goal-node set should be read for a solution.
  bool iterate();

  /// Pops and expands nodes until a goal node is popped (informed mode) or
  /// the queue is exhausted. Returns true when a goal node was popped.
  bool graph_search();

  /// Copies every vertex's h onto its belief nodes and re-keys the queue.
  void refresh_heuristics();

  bool budget_exhausted() const;
  double elapsed() const;

  const Scenario& scenario() const { return scenario_; }
  const PlannerConfig& config() const { return config_; }
  const Graph& graph() const { return graph_; }
  Graph& graph() { return graph_; }
  const BeliefTree& tree() const { return tree_; }
  BeliefTree& tree() { return tree_; }
  const BeliefQueue& queue() const { return queue_; }
  BeliefQueue& queue() { return queue_; }
  VertexId start_vertex() const { return start_; }
  VertexId goal_vertex() const { return goal_; }
  NodeId root() const { return root_; }
  const PlanResult& result() const { return result_; }
  PropagateOptions propagate_options() const;

  /// Root-to-node chain for a live node.
  std::vector<PathStep> trace_path(NodeId n) const;

  /// Cheapest live goal node, or kNoNode.
  NodeId best_goal_node() const;

 private:
  void expand(NodeId n);
  void record_solution(const ProgressCallback* cb);
  void emit(ProgressEvent::Kind kind, const ProgressCallback* cb);

  Scenario scenario_;
  PlannerConfig config_;
  StateSampler sampler_;
  Rng sample_rng_;
  std::shared_ptr<const NormalPool> draws_;
  NeighborhoodParams neighborhood_;
  Graph graph_;
  BeliefTree tree_;
  BeliefQueue queue_;
  VertexId start_ = kNoVertex;
  VertexId goal_ = kNoVertex;
  NodeId root_ = kNoNode;
  double best_cost_ = kInf;
  PlanResult result_;
  std::chrono::steady_clock::time_point t0_;
  bool search_aborted_ = false;
};

/// Convenience: run the planner with `config.mode`.
PlanResult plan(const Scenario& scenario, const PlannerConfig& config, const ProgressCallback& on_progress = {});

/// Baseline entry point (forces RRBT mode).
PlanResult rrbt_plan(const Scenario& scenario, PlannerConfig config, const ProgressCallback& on_progress = {});

}  // namespace ibbt

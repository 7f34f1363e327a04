#include "ibbt/planner.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ibbt {

std::string_view to_string(PlannerMode m) { return m == PlannerMode::RRBT ? "rrbt" : "ibbt"; }

PlannerMode planner_mode_from_string(std::string_view s) {
  if (s == "ibbt") return PlannerMode::IBBT;
  if (s == "rrbt") return PlannerMode::RRBT;
  throw std::invalid_argument("unknown planner '" + std::string(s) + "'");
}

void PlannerConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("planner: batch_size must be at least 1");
  if (eps_dominance < 0.0) throw std::invalid_argument("planner: eps_dominance must be nonnegative");
  if (lambda_P < 0.0) throw std::invalid_argument("planner: lambda_P must be nonnegative");
  if (max_seconds <= 0.0 && max_batches <= 0 && !stop_on_first_solution)
    throw std::invalid_argument("planner: at least one stop budget is required");
  if (near_gamma && !(*near_gamma > 0.0)) throw std::invalid_argument("planner: near gamma must be positive");
  if (near_r_max && !(*near_r_max > 0.0)) throw std::invalid_argument("planner: near r_max must be positive");
  chance.validate();
}

// --- BeliefTree ------------------------------------------------------------

NodeId BeliefTree::insert(BeliefNode n) {
  n.id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(std::move(n));
  alive_.push_back(true);
  ++live_;
  return nodes_.back().id;
}

void BeliefTree::erase(NodeId id) {
  if (!alive(id)) return;
  alive_[id] = false;
  --live_;
  // Release the covariance storage; the slot keeps the id reserved.
  nodes_[id].P.resize(0, 0);
  nodes_[id].P_tilde.resize(0, 0);
  nodes_[id].children.clear();
  nodes_[id].children.shrink_to_fit();
}

// --- BeliefQueue -----------------------------------------------------------

void BeliefQueue::push(const BeliefNode& n) {
  if (keys_.count(n.id)) return;
  Key k{n.f(), n.c, n.id};
  order_.insert(k);
  keys_.emplace(n.id, k);
}

NodeId BeliefQueue::pop_best() {
  if (order_.empty()) throw std::out_of_range("pop_best: empty queue");
  const Key k = *order_.begin();
  order_.erase(order_.begin());
  keys_.erase(k.id);
  return k.id;
}

bool BeliefQueue::erase(NodeId id) {
  auto it = keys_.find(id);
  if (it == keys_.end()) return false;
  order_.erase(it->second);
  keys_.erase(it);
  return true;
}

double BeliefQueue::best_f() const { return order_.empty() ? kInf : order_.begin()->f; }

std::size_t BeliefQueue::prune(double cost) {
  std::size_t removed = 0;
  while (!order_.empty()) {
    auto last = std::prev(order_.end());
    if (!(last->f > cost)) break;
    keys_.erase(last->id);
    order_.erase(last);
    ++removed;
  }
  return removed;
}

void BeliefQueue::rekey(const BeliefTree& tree) {
  std::vector<NodeId> all = ids();
  order_.clear();
  keys_.clear();
  for (NodeId id : all) push(tree.node(id));
}

std::vector<NodeId> BeliefQueue::ids() const {
  std::vector<NodeId> out;
  out.reserve(order_.size());
  for (const auto& k : order_) out.push_back(k.id);
  return out;
}

NodeId pop_best(BeliefQueue& q) { return q.pop_best(); }

std::size_t prune_queue(BeliefQueue& q, double cost) { return q.prune(cost); }

// --- AppendBelief ----------------------------------------------------------

namespace {

void remove_subtree(Graph& graph, BeliefTree& tree, BeliefQueue& queue, NodeId top, std::vector<NodeId>& removed) {
  const NodeId parent = tree.node(top).parent;
  if (tree.alive(parent)) {
    auto& siblings = tree.node(parent).children;
    siblings.erase(std::remove(siblings.begin(), siblings.end(), top), siblings.end());
  }
  std::vector<NodeId> stack{top};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const BeliefNode& n = tree.node(id);
    for (NodeId ch : n.children) stack.push_back(ch);
    auto& at_vertex = graph.vertex(n.vertex).nodes;
    at_vertex.erase(std::remove(at_vertex.begin(), at_vertex.end(), id), at_vertex.end());
    queue.erase(id);
    tree.erase(id);
    removed.push_back(id);
  }
}

bool in_subtree(const BeliefTree& tree, NodeId top, NodeId needle) {
  for (NodeId cur = needle; cur != kNoNode; cur = tree.node(cur).parent)
    if (cur == top) return true;
  return false;
}

}  // namespace

AppendResult append_belief(Graph& graph, BeliefTree& tree, BeliefQueue& queue, BeliefNode n_new, double eps) {
  AppendResult out;
  const VertexId v = n_new.vertex;
  for (NodeId id : graph.vertex(v).nodes) {
    const BeliefNode& inc = tree.node(id);
    if (dominates(inc, n_new, eps) || equivalent(inc, n_new, eps)) return out;
  }
  const NodeId parent = n_new.parent;
  const NodeId id = tree.insert(std::move(n_new));
  if (tree.alive(parent)) tree.node(parent).children.push_back(id);
  out.accepted = id;

  const std::vector<NodeId> incumbents = graph.vertex(v).nodes;
  graph.vertex(v).nodes.push_back(id);
  for (NodeId inc : incumbents) {
    if (!tree.alive(inc)) continue;
    if (dominates(tree.node(id), tree.node(inc), eps) && !in_subtree(tree, inc, id))
      remove_subtree(graph, tree, queue, inc, out.removed);
  }
  return out;
}

// --- Planner ---------------------------------------------------------------

Planner::Planner(const Scenario& scenario, PlannerConfig config) : Planner(scenario, std::move(config), {}) {}

Planner::Planner(const Scenario& scenario, PlannerConfig config, StateSampler sampler)
    : scenario_(scenario), config_(std::move(config)), sampler_(std::move(sampler)) {
  if (auto v = scenario_.violations(); !v.empty()) throw std::invalid_argument("planner: invalid scenario: " + v.front());
  if (config_.mode == PlannerMode::RRBT) config_.batch_size = 1;
  config_.validate();
  sample_rng_.seed(substream_seed(config_.seed, 0x5a4d9e11ULL));
  if (!sampler_) sampler_ = [this] { return sample_free(scenario_, sample_rng_); };
  draws_ = std::make_shared<const NormalPool>(config_.seed, config_.chance.mc_samples);
  neighborhood_ = default_neighborhood(scenario_);
  if (config_.near_gamma) neighborhood_.gamma = *config_.near_gamma;
  if (config_.near_r_max) neighborhood_.r_max = *config_.near_r_max;

  start_ = graph_.add_vertex(scenario_.start);
  goal_ = graph_.add_vertex(scenario_.goal);
  graph_.vertex(goal_).h = 0.0;

  BeliefNode root;
  root.vertex = start_;
  root.P = scenario_.P0;
  root.P_tilde = scenario_.P_tilde0;
  root.c = 0.0;
  root.h = config_.mode == PlannerMode::IBBT ? kInf : 0.0;
  root_ = tree_.insert(std::move(root));
  graph_.vertex(start_).nodes.push_back(root_);
  queue_.push(tree_.node(root_));
  t0_ = std::chrono::steady_clock::now();
}

PropagateOptions Planner::propagate_options() const {
  PropagateOptions o;
  o.chance = config_.chance;
  o.lambda_P = config_.lambda_P;
  o.seed = config_.seed;
  o.draws = draws_;
  return o;
}

double Planner::elapsed() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
}

bool Planner::budget_exhausted() const {
  if (config_.max_seconds > 0.0 && elapsed() >= config_.max_seconds) return true;
  if (config_.max_batches > 0 && result_.stats.batches >= config_.max_batches) return true;
  return false;
}

void Planner::refresh_heuristics() {
  for (auto& v : graph_.vertices())
    for (NodeId id : v.nodes) tree_.node(id).h = v.h;
  queue_.rekey(tree_);
}

void Planner::expand(NodeId n) {
  const BeliefNode from = tree_.node(n);
  const std::vector<EdgeId>& outs = graph_.out_edges(from.vertex);
  const std::size_t count = outs.size();
  const PropagateOptions opts = propagate_options();
  for (std::size_t i = from.expanded_edges; i < count; ++i) {
    const Edge& e = graph_.edge(graph_.out_edges(from.vertex)[i]);
    ++result_.stats.propagations;
    PropagateResult r = propagate_edge(e, from, scenario_, opts);
    if (std::holds_alternative<Infeasible>(r)) {
      ++result_.stats.infeasible_propagations;
      continue;
    }
    BeliefNode child = std::get<BeliefNode>(std::move(r));
    child.h = config_.mode == PlannerMode::IBBT ? graph_.vertex(child.vertex).h : 0.0;
    AppendResult a = append_belief(graph_, tree_, queue_, std::move(child), config_.eps_dominance);
    result_.stats.nodes_pruned += a.removed.size();
    if (a.accepted != kNoNode) queue_.push(tree_.node(a.accepted));
    if (!tree_.alive(n)) return;
  }
  tree_.node(n).expanded_edges = count;
}

bool Planner::graph_search() {
  const bool informed = config_.mode == PlannerMode::IBBT;
  while (!queue_.empty()) {
    if (config_.max_seconds > 0.0 && elapsed() >= config_.max_seconds) {
      search_aborted_ = true;
      return false;
    }
    // Nodes that cannot reach the goal on the current graph wait for a later batch.
    if (informed && queue_.best_f() == kInf) return false;
    const NodeId n = queue_.pop_best();
    ++result_.stats.queue_pops;
    if (informed && tree_.node(n).vertex == goal_) return true;
    expand(n);
  }
  return false;
}

NodeId Planner::best_goal_node() const {
  NodeId best = kNoNode;
  for (NodeId id : graph_.vertex(goal_).nodes)
    if (best == kNoNode || tree_.node(id).c < tree_.node(best).c) best = id;
  return best;
}

std::vector<PathStep> Planner::trace_path(NodeId n) const {
  std::vector<PathStep> path;
  for (NodeId cur = n; cur != kNoNode; cur = tree_.node(cur).parent) {
    const BeliefNode& b = tree_.node(cur);
    PathStep s;
    s.vertex = b.vertex;
    s.edge = b.in_edge;
    s.node = b.id;
    s.x = graph_.vertex(b.vertex).x;
    s.P = b.P;
    s.P_tilde = b.P_tilde;
    s.c = b.c;
    path.push_back(std::move(s));
  }
  std::reverse(path.begin(), path.end());
  return path;
}

void Planner::emit(ProgressEvent::Kind kind, const ProgressCallback* cb) {
  PlanStats& s = result_.stats;
  s.vertices = graph_.num_vertices();
  s.edges = graph_.num_edges();
  s.nodes_created = tree_.created();
  s.nodes_alive = tree_.size();
  if (!cb || !*cb) return;
  ProgressEvent ev;
  ev.kind = kind;
  ev.batch = s.batches;
  ev.elapsed = elapsed();
  ev.best_cost = best_cost_;
  ev.stats = s;
  (*cb)(ev, *this);
}

void Planner::record_solution(const ProgressCallback* cb) {
  const NodeId best = best_goal_node();
  if (best == kNoNode) return;
  const double cost = tree_.node(best).c;
  if (!(cost < best_cost_)) return;
  best_cost_ = cost;
  const double t = elapsed();
  result_.solution_path = trace_path(best);
  result_.cost = cost;
  result_.anytime_trace.push_back({t, result_.stats.batches, cost});
  if (result_.first_solution_seconds == kInf) result_.first_solution_seconds = t;
  emit(ProgressEvent::Kind::Solution, cb);
}

bool Planner::iterate() {
  const std::vector<VertexId> added =
      rrg_batch(graph_, scenario_, neighborhood_, config_.batch_size, sampler_);
  ++result_.stats.batches;
  const bool informed = config_.mode == PlannerMode::IBBT;
  if (informed) {
    value_iteration(graph_, goal_);
    refresh_heuristics();
  }
  for (VertexId v : added)
    for (EdgeId eid : graph_.in_edges(v))
      for (NodeId id : graph_.vertex(graph_.edge(eid).from).nodes) queue_.push(tree_.node(id));
  if (informed) {
    queue_.prune(best_cost_);
    for (NodeId id : graph_.vertex(goal_).nodes) queue_.push(tree_.node(id));
  }
  const bool flag = graph_search();
  // The baseline reads its solution after every exhaustive search.
  return informed ? flag : !search_aborted_;
}

PlanResult Planner::run(const ProgressCallback& on_progress) {
  t0_ = std::chrono::steady_clock::now();
  const ProgressCallback* cb = &on_progress;
  while (!budget_exhausted() && !search_aborted_) {
    if (iterate()) record_solution(cb);
    emit(ProgressEvent::Kind::Batch, cb);
    if (config_.stop_on_first_solution && result_.solved()) break;
  }
  emit(ProgressEvent::Kind::Finished, cb);
  return result_;
}

PlanResult plan(const Scenario& scenario, const PlannerConfig& config, const ProgressCallback& on_progress) {
  Planner p(scenario, config);
  return p.run(on_progress);
}

PlanResult rrbt_plan(const Scenario& scenario, PlannerConfig config, const ProgressCallback& on_progress) {
  config.mode = PlannerMode::RRBT;
  return plan(scenario, config, on_progress);
}

}  // namespace ibbt

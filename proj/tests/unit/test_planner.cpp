#include "ibbt/planner.hpp"
#include "ibbt/scenario_io.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

using namespace ibbt;

namespace {

StateVec di(double x, double y) {
  StateVec s = StateVec::Zero(4);
  s(0) = x;
  s(1) = y;
  return s;
}

BeliefNode make_node(NodeId id, VertexId v, double c, double h, double s = 0.1) {
  BeliefNode n;
  n.id = id;
  n.vertex = v;
  n.c = c;
  n.h = h;
  n.P = s * Mat::Identity(2, 2);
  n.P_tilde = 0.5 * s * Mat::Identity(2, 2);
  return n;
}

/// Small double-integrator instance: a 10 x 4 strip with a central block.
Scenario strip_scenario() {
  Scenario sc = oracle::open_scenario(10, 4);
  sc.obstacles.push_back(make_rectangle(4.5, 1.2, 5.5, 2.8));
  sc.info_regions.push_back(make_rectangle(3, 0, 4, 1));
  sc.start = di(1, 2);
  sc.goal = di(9, 2);
  sc.delta = 0.1;
  return sc;
}

PlannerConfig strip_config(PlannerMode mode = PlannerMode::IBBT) {
  PlannerConfig c;
  c.mode = mode;
  c.batch_size = 20;
  c.max_seconds = 0.0;
  c.max_batches = 3;
  c.eps_dominance = 0.01;
  c.seed = 4;
  c.chance.delta = 0.1;
  c.chance.mc_samples = 200;
  return c;
}

/// Sampler that records everything it hands out.
struct Recorder {
  Scenario scenario;
  Rng rng;
  std::vector<StateVec> drawn;
};

StateSampler recording(const std::shared_ptr<Recorder>& r) {
  return [r] {
    r->drawn.push_back(sample_free(r->scenario, r->rng));
    return r->drawn.back();
  };
}

StateSampler replay(std::vector<StateVec> xs) {
  auto i = std::make_shared<std::size_t>(0);
  return [xs = std::move(xs), i] { return xs.at((*i)++); };
}

double min_goal_cost(const Planner& p) {
  const NodeId g = p.best_goal_node();
  return g == kNoNode ? kInf : p.tree().node(g).c;
}

}  // namespace

TEST_SUITE("queue") {
  TEST_CASE("pops the smallest f") {
    BeliefQueue q;
    q.push(make_node(0, 0, 3, 0));
    q.push(make_node(1, 0, 1, 0));
    q.push(make_node(2, 0, 2, 0));
    CHECK(pop_best(q) == 1);
    CHECK(q.size() == 2);
  }

  TEST_CASE("equal f breaks ties on c then id") {
    BeliefQueue q;
    q.push(make_node(5, 0, 2, 1));
    q.push(make_node(6, 0, 1, 2));
    q.push(make_node(4, 0, 1, 2));
    CHECK(pop_best(q) == 4);
    CHECK(pop_best(q) == 6);
    CHECK(pop_best(q) == 5);
    CHECK_THROWS(pop_best(q));
  }

  TEST_CASE("interleaved pushes and pops follow sorted order") {
    Rng rng(71);
    BeliefQueue q;
    std::vector<std::tuple<double, double, NodeId>> ref;
    NodeId next = 0;
    for (int step = 0; step < 2000; ++step) {
      if (ref.empty() || oracle::uniform(rng, 0, 1) < 0.6) {
        const double c = std::floor(oracle::uniform(rng, 0, 5));
        const double h = std::floor(oracle::uniform(rng, 0, 5));
        q.push(make_node(next, 0, c, h));
        ref.emplace_back(c + h, c, next++);
      } else {
        auto it = std::min_element(ref.begin(), ref.end());
        CHECK(pop_best(q) == std::get<2>(*it));
        ref.erase(it);
      }
    }
  }

  TEST_CASE("prune keeps f equal to the cost") {
    BeliefQueue q;
    q.push(make_node(0, 0, 1, 0));
    q.push(make_node(1, 0, 5, 0));
    q.push(make_node(2, 0, 9, 0));
    CHECK(prune_queue(q, kInf) == 0);
    CHECK(q.size() == 3);
    CHECK(prune_queue(q, 5.0) == 1);
    CHECK(q.ids() == std::vector<NodeId>{0, 1});
  }

  TEST_CASE("prune matches a brute-force filter") {
    Rng rng(72);
    for (int t = 0; t < 50; ++t) {
      BeliefQueue q;
      std::vector<std::pair<double, NodeId>> all;
      for (NodeId i = 0; i < 40; ++i) {
        const double c = oracle::uniform(rng, 0, 10);
        const double h = oracle::uniform(rng, 0, 1) < 0.1 ? kInf : oracle::uniform(rng, 0, 10);
        q.push(make_node(i, 0, c, h));
        all.push_back({c + h, i});
      }
      const double cost = oracle::uniform(rng, 0, 20);
      prune_queue(q, cost);
      std::vector<NodeId> keep = q.ids(), expect;
      for (auto [f, id] : all)
        if (!(f > cost)) expect.push_back(id);
      std::sort(keep.begin(), keep.end());
      CHECK(keep == expect);
    }
  }

  TEST_CASE("erase and rekey") {
    BeliefTree tree;
    BeliefQueue q;
    for (int i = 0; i < 3; ++i) q.push(tree.node(tree.insert(make_node(kNoNode, 0, i, 0))));
    CHECK(q.erase(1));
    CHECK_FALSE(q.erase(1));
    tree.node(0).h = 10.0;
    q.rekey(tree);
    CHECK(q.best_f() == 2.0);
    CHECK(pop_best(q) == 2);
  }
}

TEST_SUITE("append_belief") {
  TEST_CASE("empty vertex accepts") {
    Graph g;
    g.add_vertex(di(0, 0));
    BeliefTree tree;
    BeliefQueue q;
    const auto r = append_belief(g, tree, q, make_node(kNoNode, 0, 1, 0), 1e-6);
    CHECK(r.accepted != kNoNode);
    CHECK(g.vertex(0).nodes.size() == 1);
    CHECK(r.removed.empty());
  }

  TEST_CASE("dominated newcomer is rejected") {
    Graph g;
    g.add_vertex(di(0, 0));
    BeliefTree tree;
    BeliefQueue q;
    append_belief(g, tree, q, make_node(kNoNode, 0, 1, 0, 0.1), 1e-6);
    const auto r = append_belief(g, tree, q, make_node(kNoNode, 0, 2, 0, 0.2), 1e-6);
    CHECK(r.accepted == kNoNode);
    CHECK(tree.size() == 1);
    CHECK(g.vertex(0).nodes.size() == 1);
  }

  TEST_CASE("equal newcomer loses to the incumbent") {
    Graph g;
    g.add_vertex(di(0, 0));
    BeliefTree tree;
    BeliefQueue q;
    append_belief(g, tree, q, make_node(kNoNode, 0, 1, 0), 1e-6);
    CHECK(append_belief(g, tree, q, make_node(kNoNode, 0, 1, 0), 1e-6).accepted == kNoNode);
  }

  TEST_CASE("dominating newcomer removes the incumbent subtree") {
    Graph g;
    for (int i = 0; i < 3; ++i) g.add_vertex(di(i, 0));
    BeliefTree tree;
    BeliefQueue q;
    auto attach = [&](BeliefNode n) {
      const NodeId id = tree.insert(std::move(n));
      const BeliefNode& b = tree.node(id);
      if (b.parent != kNoNode) tree.node(b.parent).children.push_back(id);
      g.vertex(b.vertex).nodes.push_back(id);
      q.push(tree.node(id));
      return id;
    };
    const NodeId root = attach(make_node(kNoNode, 0, 0, 0, 0.1));
    BeliefNode inc = make_node(kNoNode, 1, 2, 0, 0.4);
    inc.parent = root;
    const NodeId incumbent = attach(inc);
    BeliefNode a = make_node(kNoNode, 2, 3, 0, 0.5);
    a.parent = incumbent;
    BeliefNode b = make_node(kNoNode, 2, 3.5, 0, 0.45);
    b.parent = incumbent;
    const NodeId ca = attach(a), cb = attach(b);
    const std::size_t before = tree.size();

    BeliefNode better = make_node(kNoNode, 1, 1, 0, 0.2);
    better.parent = root;
    const auto r = append_belief(g, tree, q, better, 1e-6);
    REQUIRE(r.accepted != kNoNode);
    std::vector<NodeId> removed = r.removed;
    std::sort(removed.begin(), removed.end());
    CHECK(removed == std::vector<NodeId>{incumbent, ca, cb});
    CHECK(static_cast<long>(tree.size()) - static_cast<long>(before) == 1 - 3);
    CHECK_FALSE(q.contains(incumbent));
    CHECK_FALSE(q.contains(ca));
    CHECK_FALSE(q.contains(cb));
    CHECK(g.vertex(1).nodes == std::vector<NodeId>{r.accepted});
    CHECK(g.vertex(2).nodes.empty());
    CHECK(tree.node(root).children == std::vector<NodeId>{r.accepted});
  }
}

TEST_SUITE("graph_search") {
  TEST_CASE("empty queue returns without a flag") {
    Planner p(strip_scenario(), strip_config());
    p.queue().erase(p.root());
    CHECK_FALSE(p.graph_search());
  }

  TEST_CASE("lone goal node flags immediately") {
    Planner p(strip_scenario(), strip_config());
    p.queue().erase(p.root());
    BeliefNode g = make_node(kNoNode, p.goal_vertex(), 4.0, 0.0);
    g.P = 0.01 * Mat::Identity(4, 4);
    g.P_tilde = g.P;
    const NodeId id = p.tree().insert(g);
    p.graph().vertex(p.goal_vertex()).nodes.push_back(id);
    p.queue().push(p.tree().node(id));
    CHECK(p.graph_search());
    CHECK(p.result().stats.queue_pops == 1);
    CHECK(p.queue().empty());
  }

  TEST_CASE("start-to-goal edge is expanded then the goal node flags") {
    Scenario sc = oracle::open_scenario(10, 4);
    Planner p(sc, strip_config());
    auto e = connect(sc.model, sc.start, sc.goal);
    REQUIRE(e);
    e->from = p.start_vertex();
    e->to = p.goal_vertex();
    p.graph().add_edge(std::move(*e));
    value_iteration(p.graph(), p.goal_vertex());
    p.refresh_heuristics();
    CHECK(p.graph_search());
    CHECK(p.result().stats.queue_pops == 2);
    CHECK(p.result().stats.propagations == 1);
    REQUIRE(p.graph().vertex(p.goal_vertex()).nodes.size() == 1);
    const auto path = p.trace_path(p.best_goal_node());
    CHECK(path.size() == 2);
    CHECK(path.front().node == p.root());
  }
}

TEST_SUITE("plan") {
  TEST_CASE("walled-off goal yields no solution") {
    Scenario sc = strip_scenario();
    sc.obstacles.push_back(make_rectangle(7, 0, 7.5, 4));
    PlannerConfig c = strip_config();
    c.max_batches = 2;
    Planner p(sc, c);
    const PlanResult r = p.run();
    CHECK_FALSE(r.solved());
    CHECK(r.cost == kInf);
    CHECK(r.anytime_trace.empty());
    CHECK(r.stats.batches == 2);
  }

  TEST_CASE("inactive chance constraint gives the nominal shortest path") {
    ScenarioFile f = load_scenario(oracle::scenario_path("corridor.json"));
    f.config.stop_on_first_solution = true;
    f.config.max_batches = 10;
    Planner p(f.scenario, f.config);
    const PlanResult r = p.run();
    REQUIRE(r.solved());
    CHECK(std::abs(r.cost - p.graph().vertex(p.start_vertex()).h) < 1e-9);
  }

  TEST_CASE("anytime, tree, dominance and soundness invariants") {
    const Scenario sc = strip_scenario();
    PlannerConfig c = strip_config();
    c.max_batches = 4;
    Planner p(sc, c);
    const PlanResult r = p.run();
    REQUIRE(r.solved());
    for (std::size_t i = 1; i < r.anytime_trace.size(); ++i)
      CHECK(r.anytime_trace[i].cost < r.anytime_trace[i - 1].cost);
    CHECK(r.cost == r.solution_path.back().c);
    CHECK(r.solution_path.front().node == p.root());
    CHECK(r.solution_path.back().vertex == p.goal_vertex());

    const PropagateOptions opts = p.propagate_options();
    const BeliefTree& t = p.tree();
    t.for_each([&](const BeliefNode& n) {
      std::size_t hops = 0;
      for (NodeId cur = n.id; cur != p.root(); cur = t.node(cur).parent) {
        REQUIRE(t.alive(t.node(cur).parent));
        REQUIRE(++hops <= t.created());
      }
      if (n.id == p.root()) return;
      const BeliefNode& parent = t.node(n.parent);
      CHECK(std::find(parent.children.begin(), parent.children.end(), n.id) != parent.children.end());
      auto replayed = propagate_edge(p.graph().edge(n.in_edge), parent, sc, opts);
      REQUIRE(std::holds_alternative<BeliefNode>(replayed));
      CHECK(std::get<BeliefNode>(replayed).P == n.P);
      CHECK(std::get<BeliefNode>(replayed).c == n.c);
    });
    for (NodeId id : p.queue().ids()) CHECK(t.alive(id));
    for (const auto& v : p.graph().vertices())
      for (NodeId a : v.nodes)
        for (NodeId b : v.nodes)
          if (a != b) CHECK_FALSE(dominates(t.node(a), t.node(b), c.eps_dominance));
    // Admissible heuristic along the solution.
    for (const auto& s : r.solution_path)
      CHECK(r.cost - s.c >= p.graph().vertex(s.vertex).h - 1e-9);
  }

  TEST_CASE("identical inputs give bitwise-identical runs") {
    const Scenario sc = strip_scenario();
    Planner a(sc, strip_config()), b(sc, strip_config());
    const PlanResult ra = a.run(), rb = b.run();
    REQUIRE(a.graph().num_vertices() == b.graph().num_vertices());
    for (std::size_t v = 0; v < a.graph().num_vertices(); ++v)
      CHECK(a.graph().vertex(static_cast<VertexId>(v)).x == b.graph().vertex(static_cast<VertexId>(v)).x);
    CHECK(ra.cost == rb.cost);
    REQUIRE(ra.solution_path.size() == rb.solution_path.size());
    for (std::size_t i = 0; i < ra.solution_path.size(); ++i) {
      CHECK(ra.solution_path[i].vertex == rb.solution_path[i].vertex);
      CHECK(ra.solution_path[i].P == rb.solution_path[i].P);
    }
  }

  TEST_CASE("flagged goal cost equals an exhaustive search of the same graph") {
    const Scenario sc = strip_scenario();
    auto rec = std::make_shared<Recorder>(Recorder{sc, Rng(99), {}});
    PlannerConfig c = strip_config();
    c.max_batches = 6;
    Planner ib(sc, c, recording(rec));
    bool flagged = false;
    while (!flagged && !ib.budget_exhausted()) flagged = ib.iterate();
    REQUIRE(flagged);
    const double informed = min_goal_cost(ib);

    PlannerConfig cr = c;
    cr.mode = PlannerMode::RRBT;
    cr.max_batches = static_cast<int>(rec->drawn.size());
    Planner rr(sc, cr, replay(rec->drawn));
    for (int i = 0; i < cr.max_batches; ++i) rr.iterate();
    CHECK(rr.graph().num_edges() == ib.graph().num_edges());
    CHECK(std::abs(min_goal_cost(rr) - informed) <= 1e-9);
    CHECK(rr.tree().created() > ib.tree().created());
  }
}

TEST_SUITE("rrbt") {
  TEST_CASE("single-sample instance matches the informed planner") {
    Scenario sc = oracle::open_scenario(10, 4);
    sc.delta = 0.5;
    PlannerConfig c = strip_config();
    c.batch_size = 1;
    c.max_batches = 1;
    c.chance.delta = 0.5;
    c.near_gamma = 100.0;
    c.near_r_max = 100.0;
    Planner ib(sc, c, replay({di(5, 2.2)}));
    const PlanResult ri = ib.run();
    c.mode = PlannerMode::RRBT;
    Planner rr(sc, c, replay({di(5, 2.2)}));
    const PlanResult rb = rr.run();
    REQUIRE(ri.solved());
    REQUIRE(rb.solved());
    CHECK(std::abs(ri.cost - rb.cost) < 1e-9);
    REQUIRE(ri.solution_path.size() == rb.solution_path.size());
    for (std::size_t i = 0; i < ri.solution_path.size(); ++i)
      CHECK(ri.solution_path[i].vertex == rb.solution_path[i].vertex);
  }

  TEST_CASE("open map costs never increase") {
    Scenario sc = oracle::open_scenario(10, 4);
    sc.delta = 0.5;
    PlannerConfig c = strip_config(PlannerMode::RRBT);
    c.max_batches = 60;
    c.chance.delta = 0.5;
    const PlanResult r = rrbt_plan(sc, c);
    REQUIRE(r.solved());
    for (std::size_t i = 1; i < r.anytime_trace.size(); ++i)
      CHECK(r.anytime_trace[i].cost < r.anytime_trace[i - 1].cost);
  }
}

TEST_SUITE("planner_config") {
  TEST_CASE("validation and mode names") {
    PlannerConfig c;
    c.max_seconds = 0.0;
    CHECK_THROWS(c.validate());
    c.max_batches = 1;
    CHECK_NOTHROW(c.validate());
    c.batch_size = 0;
    CHECK_THROWS(c.validate());
    CHECK(planner_mode_from_string("rrbt") == PlannerMode::RRBT);
    CHECK(to_string(PlannerMode::IBBT) == "ibbt");
    CHECK_THROWS(planner_mode_from_string("rrt"));
  }

  TEST_CASE("baseline forces single-sample batches") {
    Planner p(strip_scenario(), strip_config(PlannerMode::RRBT));
    CHECK(p.config().batch_size == 1);
  }

  TEST_CASE("invalid scenario is rejected") {
    Scenario sc = strip_scenario();
    sc.goal = di(5, 2);  // inside the block
    CHECK_THROWS(Planner(sc, strip_config()));
  }
}

#pragma once

#include "ibbt/dynamics.hpp"
#include "ibbt/environment.hpp"
#include "ibbt/types.hpp"

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <variant>
#include <vector>

namespace ibbt {

/// Node of the belief tree: covariance pair plus search bookkeeping.
struct BeliefNode {
  NodeId id = kNoNode;
  VertexId vertex = kNoVertex;
  Mat P;        // state covariance
  Mat P_tilde;  // estimation-error covariance
  double c = 0.0;
  double h = 0.0;
  NodeId parent = kNoNode;
  std::vector<NodeId> children;
  EdgeId in_edge = kNoEdge;
  /// Number of the vertex's out-edges already propagated from this node.
  std::size_t expanded_edges = 0;

  double f() const { return c + h; }
};

struct KalmanStepResult {
  Mat P;
  Mat P_hat;
  Mat P_tilde;
  Mat L;
};

struct DegenerateMeasurement : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One Kalman prediction/update plus the estimated-state covariance recursion.
/// `step.D` must be resolved. Throws DegenerateMeasurement when the innovation
/// covariance is singular.
KalmanStepResult kalman_step(const LtvStep& step, const Mat& K, const Mat& P_hat_prev, const Mat& P_tilde_prev);

/// Standard-normal 2D draws shared by the collision checks of one run. A check
/// reads a contiguous slice starting at an offset derived from its key, so the
/// draws within one estimate are independent and every check is replayable.
class NormalPool {
 public:
  NormalPool(std::uint64_t seed, int slice_size, std::size_t pool_size = std::size_t{1} << 16);
  const Vec2* slice(std::uint64_t key) const;
  int slice_size() const { return slice_; }

 private:
  std::vector<Vec2> draws_;  // pool_size entries followed by a copy of the first slice_size
  std::size_t size_ = 0;
  int slice_ = 0;
};

struct PropagateOptions {
  ChanceConfig chance;
  double lambda_P = 0.1;   // weight of sum_k trace(P_k) dt_k in the edge cost
  std::uint64_t seed = 0;  // run seed; Monte-Carlo substreams derive from (seed, edge, step)
  /// Shared draws; when null every check generates its own substream.
  std::shared_ptr<const NormalPool> draws;
};

struct Infeasible {
  int step = -1;
  double probability = 0.0;
};

using PropagateResult = std::variant<BeliefNode, Infeasible>;

/// Covariance propagation, per-step chance-constraint check and cost update
/// across `edge`, starting from `node` at the edge's source vertex.
PropagateResult propagate_edge(const Edge& edge, const BeliefNode& node, const Scenario& scenario,
                               const PropagateOptions& options);

/// Estimated collision probability at one step of an edge, using the
/// deterministic Monte-Carlo substream for (edge, step).
double step_collision_probability(const Edge& edge, int step, const Mat& P, const Scenario& scenario,
                                  const PropagateOptions& options);

/// True when `na` dominates `nb`: no worse in f, P and P_tilde (Loewner order
/// with slack eps). Bitwise-identical triples do not dominate each other.
bool dominates(const BeliefNode& na, const BeliefNode& nb, double eps);

/// Equal triples within the dominance tolerances (incumbent-wins tie rule).
bool equivalent(const BeliefNode& na, const BeliefNode& nb, double eps);

}  // namespace ibbt

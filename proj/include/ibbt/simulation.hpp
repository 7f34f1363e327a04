#pragma once

#include "ibbt/dynamics.hpp"
#include "ibbt/environment.hpp"

#include <vector>

namespace ibbt {

/// One Monte-Carlo execution of an edge's controller.
struct ClosedLoopRollout {
  std::vector<StateVec> states;     // true states x_k
  std::vector<StateVec> estimates;  // nominal + estimated error
};

/// Simulates the true plant (nonlinear for Dubins) under u = u_bar + K x_hat
/// with a Kalman filter on the edge's LTV model. Measurement noise is looked
/// up at the nominal position of each step. `xhat0` is the initial estimate
/// of the deviation from the nominal start.
ClosedLoopRollout simulate_closed_loop(const ModelSpec& model, const Edge& edge, const Scenario& scenario,
                                       const StateVec& initial_true_state, const Vec& xhat0,
                                       const Mat& P_tilde0, Rng& rng);

/// Chains rollouts along consecutive edges, carrying state and estimate over.
ClosedLoopRollout simulate_path(const ModelSpec& model, const std::vector<const Edge*>& edges,
                                const Scenario& scenario, const StateVec& initial_true_state, const Vec& xhat0,
                                const Mat& P_tilde0, Rng& rng);

}  // namespace ibbt

#include "ibbt/simulation.hpp"

#include "ibbt/belief.hpp"

namespace ibbt {
namespace {

Vec draw_normal(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec z(n);
  for (int i = 0; i < n; ++i) z(i) = normal(rng);
  return z;
}

struct FilterState {
  StateVec x;
  Vec xhat;
  Mat P_tilde;
};

void run_edge(const ModelSpec& model, const Edge& edge, const Scenario& scenario, FilterState& s,
              ClosedLoopRollout& out, Rng& rng) {
  const int n = model.state_dim();
  for (std::size_t k = 0; k < edge.num_steps(); ++k) {
    LtvStep step = edge.steps[k];
    step.D = measurement_noise_at(position_of(edge.states[k + 1]), scenario);
    const Vec du = edge.gains[k] * s.xhat;
    const Vec u = edge.controls[k] + du;

    s.x = step_model(model, s.x, u, step.dt) + step.G * draw_normal(static_cast<int>(step.G.cols()), rng);
    const Vec y = s.x + step.D * draw_normal(static_cast<int>(step.D.cols()), rng);

    Mat L;
    try {
      KalmanStepResult r = kalman_step(step, edge.gains[k], Mat::Zero(n, n), s.P_tilde);
      L = std::move(r.L);
      s.P_tilde = std::move(r.P_tilde);
    } catch (const DegenerateMeasurement&) {
      // No uncertainty to correct: the prediction is exact.
      L = Mat::Zero(n, n);
      s.P_tilde = step.A * s.P_tilde * step.A.transpose() + step.G * step.G.transpose();
    }
    const Vec xhat_pred = step.A * s.xhat + step.B * du;
    const Vec innovation = state_error(model, y, edge.states[k + 1]) - step.C * xhat_pred;
    s.xhat = xhat_pred + L * innovation;
    if (model.kind == ModelKind::Dubins) s.x(2) = wrap_angle(s.x(2));
    out.states.push_back(s.x);
    StateVec est = edge.states[k + 1] + s.xhat;
    if (model.kind == ModelKind::Dubins) est(2) = wrap_angle(est(2));
    out.estimates.push_back(std::move(est));
  }
}

}  // namespace

ClosedLoopRollout simulate_closed_loop(const ModelSpec& model, const Edge& edge, const Scenario& scenario,
                                       const StateVec& initial_true_state, const Vec& xhat0,
                                       const Mat& P_tilde0, Rng& rng) {
  return simulate_path(model, {&edge}, scenario, initial_true_state, xhat0, P_tilde0, rng);
}

ClosedLoopRollout simulate_path(const ModelSpec& model, const std::vector<const Edge*>& edges,
                                const Scenario& scenario, const StateVec& initial_true_state, const Vec& xhat0,
                                const Mat& P_tilde0, Rng& rng) {
  ClosedLoopRollout out;
  FilterState s{initial_true_state, xhat0, P_tilde0};
  out.states.push_back(s.x);
  StateVec est = (edges.empty() ? initial_true_state : edges.front()->states.front()) + xhat0;
  out.estimates.push_back(est);
  for (const Edge* e : edges) run_edge(model, *e, scenario, s, out, rng);
  return out;
}

}  // namespace ibbt

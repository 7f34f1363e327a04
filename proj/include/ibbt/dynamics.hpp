#pragma once

#include "ibbt/types.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace ibbt {

enum class ModelKind { DoubleIntegrator2D, Dubins };

std::string_view to_string(ModelKind k);
ModelKind model_kind_from_string(std::string_view s);

/// Plant model and steering/LQR parameters.
///
/// `process_noise` is the per-sqrt-second noise shape: a step of duration dt
/// uses G = sqrt(dt) * process_noise.
struct ModelSpec {
  ModelKind kind = ModelKind::DoubleIntegrator2D;
  double dt = 0.1;
  Mat process_noise;
  Mat lqr_Q;
  Mat lqr_R;
  double dubins_turn_radius = 1.0;
  double steering_speed_scale = 1.0;  // minimum seconds of horizon per meter (double integrator)
  double control_weight = 0.5;        // lambda_u in the double-integrator stage cost

  int state_dim() const { return kind == ModelKind::Dubins ? 3 : 4; }
  int control_dim() const { return kind == ModelKind::Dubins ? 1 : 2; }

  /// Throws std::invalid_argument when dimensions or weights are inconsistent.
  void validate() const;
};

/// Model with the default parameters filled in for the given kind.
ModelSpec default_model(ModelKind kind);

/// One step of the linearized error dynamics. `D` is resolved per position at
/// propagation time and is left empty inside stored edges.
struct LtvStep {
  Mat A, B, G, C, D;
  double dt = 0.0;
};

/// Nominal trajectory plus stabilizing gains between two graph states.
struct Edge {
  EdgeId id = kNoEdge;
  VertexId from = kNoVertex;
  VertexId to = kNoVertex;
  std::vector<StateVec> states;  // N states
  std::vector<Vec> controls;     // N - 1 controls
  std::vector<Mat> gains;        // N - 1 gains, closed loop A + B K
  // TODO: share the constant double-integrator matrices across steps; a 10 s
  // planning run on a fixture holds about 1.4 GB, mostly in these copies.
  std::vector<LtvStep> steps;    // N - 1 linearized steps
  double nominal_cost = 0.0;
  double path_length = 0.0;  // continuous steering-curve length (Dubins) or travelled distance

  std::size_t num_steps() const { return controls.size(); }
};

/// Deterministic one-step model f(x, u, 0) with step duration dt.
StateVec step_model(const ModelSpec& model, const StateVec& x, const Vec& u, double dt);

/// Stage cost J evaluated on the nominal.
double stage_cost(const ModelSpec& model, const StateVec& x, const Vec& u, double dt);

/// Nominal trajectory + LQR gains from `xa` to `xb`; nullopt when unreachable.
std::optional<Edge> connect(const ModelSpec& model, const StateVec& xa, const StateVec& xb);

/// Finite-horizon discrete LQR with terminal weight Q. Gains satisfy u = K x
/// (closed loop A + B K).
std::vector<Mat> lqr_gains(const std::vector<Mat>& A, const std::vector<Mat>& B, const Mat& Q,
                           const Mat& R);

/// Same recursion, also returning the cost-to-go matrices S_0..S_N.
std::vector<Mat> lqr_gains(const std::vector<Mat>& A, const std::vector<Mat>& B, const Mat& Q,
                           const Mat& R, std::vector<Mat>* value_matrices);

/// Linearization along a nominal trajectory (A, B, G, C; D left empty).
/// `step_dt` gives each step's duration; empty means model.dt for every step.
std::vector<LtvStep> linearize(const ModelSpec& model, const std::vector<StateVec>& states,
                               const std::vector<Vec>& controls,
                               const std::vector<double>& step_dt = {});

/// Difference x - y with the Dubins heading wrapped.
StateVec state_error(const ModelSpec& model, const StateVec& x, const StateVec& y);

/// Model distance used by nearest/near queries.
double state_distance(const ModelSpec& model, const StateVec& a, const StateVec& b);

}  // namespace ibbt

#include "ibbt/dynamics.hpp"

#include "ibbt/dubins.hpp"
#include "ibbt/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ibbt {
namespace {

constexpr double kSteeringTol = 1e-6;

Mat di_A(double dt) {
  Mat A = Mat::Identity(4, 4);
  A(0, 2) = dt;
  A(1, 3) = dt;
  return A;
}

Mat di_B(double dt) {
  Mat B = Mat::Zero(4, 2);
  B(0, 0) = B(1, 1) = 0.5 * dt * dt;
  B(2, 0) = B(3, 1) = dt;
  return B;
}

void fill_gains_and_steps(const ModelSpec& model, Edge& e, const std::vector<double>& step_dt) {
  e.steps = linearize(model, e.states, e.controls, step_dt);
  std::vector<Mat> A, B;
  A.reserve(e.steps.size());
  B.reserve(e.steps.size());
  for (const auto& s : e.steps) {
    A.push_back(s.A);
    B.push_back(s.B);
  }
  e.gains = lqr_gains(A, B, model.lqr_Q, model.lqr_R);
  e.nominal_cost = 0.0;
  for (std::size_t k = 0; k < e.controls.size(); ++k)
    e.nominal_cost += stage_cost(model, e.states[k], e.controls[k], e.steps[k].dt);
}

Edge degenerate_edge(const StateVec& x) {
  Edge e;
  e.states = {x};
  return e;
}

// Cost of minimum-energy steering over N steps: N dt + lambda_u dt d^T W_N^-1 d.
double di_horizon_cost(const ModelSpec& model, const Mat& W, const Mat& AN, const StateVec& xa, const StateVec& xb,
                       int N) {
  Eigen::LDLT<Mat> ldlt(W);
  if (ldlt.info() != Eigen::Success) return kInf;
  const Vec d = xb - AN * xa;
  return model.dt * (N + model.control_weight * d.dot(ldlt.solve(d)));
}

// Minimum-energy steering. The horizon starts at the distance-based length and
// grows while the total stage cost keeps falling.
std::optional<Edge> connect_double_integrator(const ModelSpec& model, const StateVec& xa,
                                              const StateVec& xb) {
  constexpr int kPatience = 5;
  constexpr int kMaxSteps = 2000;
  const double dt = model.dt;
  const double dist = (xb.head<2>() - xa.head<2>()).norm();
  const int N0 = std::max(2, static_cast<int>(std::ceil(model.steering_speed_scale * dist / dt - 1e-12)));
  const Mat A = di_A(dt);
  const Mat B = di_B(dt);

  int N = N0;
  {
    // W_{n+1} = A W_n A^T + B B^T, starting from W_0 = 0.
    Mat W = Mat::Zero(4, 4), AN = Mat::Identity(4, 4);
    double best = kInf;
    int worse = 0;
    for (int n = 1; n <= kMaxSteps; ++n) {
      W = A * W * A.transpose() + B * B.transpose();
      AN = A * AN;
      if (n < N0) continue;
      const double c = di_horizon_cost(model, W, AN, xa, xb, n);
      if (c < best) {
        best = c;
        N = n;
        worse = 0;
      } else if (++worse >= kPatience) {
        break;
      }
    }
    if (best == kInf) return std::nullopt;
  }

  // Phi_k = A^(N-1-k) B
  std::vector<Mat> phi(N);
  Mat Apow = Mat::Identity(4, 4);
  for (int k = N - 1; k >= 0; --k) {
    phi[k] = Apow * B;
    Apow = A * Apow;
  }
  // Apow is now A^N.
  Mat W = Mat::Zero(4, 4);
  for (const auto& p : phi) W += p * p.transpose();
  Eigen::LDLT<Mat> ldlt(W);
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  const Vec lambda = ldlt.solve(xb - Apow * xa);

  Edge e;
  e.states.reserve(N + 1);
  e.controls.reserve(N);
  e.states.push_back(xa);
  for (int k = 0; k < N; ++k) {
    Vec u = phi[k].transpose() * lambda;
    e.states.push_back(A * e.states.back() + B * u);
    e.controls.push_back(std::move(u));
  }
  if ((e.states.back() - xb).norm() > kSteeringTol) return std::nullopt;
  e.path_length = 0.0;
  for (int k = 0; k < N; ++k) e.path_length += (e.states[k + 1].head<2>() - e.states[k].head<2>()).norm();
  fill_gains_and_steps(model, e, std::vector<double>(N, dt));
  return e;
}

struct DubinsRollout {
  std::vector<StateVec> states;  // headings unwrapped
  std::vector<Vec> controls;
};

DubinsRollout roll_dubins(const Eigen::Vector3d& start, const std::vector<double>& u, double h) {
  const int N = static_cast<int>(u.size());
  DubinsRollout r;
  r.states.reserve(N + 1);
  r.controls.reserve(N);
  Vec x = start;
  r.states.push_back(x);
  for (int k = 0; k < N; ++k) {
    Vec nx(3);
    nx << x(0) + std::cos(x(2)) * h, x(1) + std::sin(x(2)) * h, x(2) + u[k] * h;
    x = nx;
    r.states.push_back(x);
    r.controls.push_back(Vec::Constant(1, u[k]));
  }
  return r;
}

/// Jacobian of the final Euler state with respect to (u_0..u_{N-1}, h).
Mat dubins_end_jacobian(const DubinsRollout& r, const std::vector<double>& u, double h) {
  const int N = static_cast<int>(u.size());
  Mat J = Mat::Zero(3, N + 1);
  // Position moves by h (cos th_j, sin th_j) for j = 0..N-1; th_j depends on u_i for i < j.
  Eigen::Vector2d tail = Eigen::Vector2d::Zero();  // sum over j > k of h^2 (-sin th_j, cos th_j)
  for (int k = N - 1; k >= 0; --k) {
    J.block<2, 1>(0, k) = tail;
    J(2, k) = h;
    const double th = r.states[k](2);
    tail += h * h * Eigen::Vector2d(-std::sin(th), std::cos(th));
  }
  double turned = 0.0;  // sum of u_i for i < j
  for (int j = 0; j < N; ++j) {
    const double th = r.states[j](2);
    J(0, N) += std::cos(th) - h * std::sin(th) * turned;
    J(1, N) += std::sin(th) + h * std::cos(th) * turned;
    turned += u[j];
  }
  J(2, N) = turned;
  return J;
}

// Discretizes the analytic Dubins curve with forward Euler, then corrects the
// controls and the step length by minimum-norm Gauss-Newton steps so the Euler
// rollout lands on the goal.
std::optional<Edge> connect_dubins(const ModelSpec& model, const StateVec& xa, const StateVec& xb) {
  const Eigen::Vector3d from(xa(0), xa(1), wrap_angle(xa(2)));
  const Eigen::Vector3d to(xb(0), xb(1), wrap_angle(xb(2)));
  const DubinsPath path = dubins_shortest(from, to, model.dubins_turn_radius);
  const double L = path.length();
  const auto turns = segment_turns(path.word);
  double heading_change = 0.0;
  for (int i = 0; i < 3; ++i) heading_change += turns[i] * path.segments[i] / path.radius;
  const double target_heading = from.z() + heading_change;

  const int base_steps = std::max(3, static_cast<int>(std::ceil(L / model.dt - 1e-12)));
  for (int attempt = 0; attempt < 3; ++attempt) {
    const int N = base_steps << attempt;
    const double h0 = L / N;
    // Headings of the continuous path sampled half a step ahead, so each Euler
    // step runs along the chord of its arc piece.
    const std::array<double, 4> joints{0.0, path.segments[0], path.segments[0] + path.segments[1], L};
    auto heading_at = [&](double s) {
      s = std::clamp(s, 0.0, L);
      double th = from.z();
      for (int i = 0; i < 3; ++i)
        th += turns[i] / path.radius * std::clamp(s - joints[i], 0.0, joints[i + 1] - joints[i]);
      return th;
    };
    std::vector<double> u(N, 0.0);
    double prev = from.z();
    for (int k = 0; k < N; ++k) {
      const double next = k + 1 < N ? heading_at((k + 1.5) * h0) : target_heading;
      u[k] = (next - prev) / h0;
      prev = next;
    }
    double h = h0;

    auto residual = [&](const DubinsRollout& r) {
      const Vec& end = r.states.back();
      return Eigen::Vector3d(end(0) - to.x(), end(1) - to.y(), end(2) - target_heading);
    };
    DubinsRollout roll = roll_dubins(from, u, h);
    Eigen::Vector3d res = residual(roll);
    bool converged = res.norm() < 1e-11;
    for (int it = 0; it < 50 && !converged; ++it) {
      const Mat J = dubins_end_jacobian(roll, u, h);
      const Vec delta = J.transpose() * (J * J.transpose()).ldlt().solve(res);
      if (!delta.allFinite()) break;
      // Backtrack until the residual shrinks.
      bool improved = false;
      for (double alpha = 1.0; alpha > 1e-3 && !improved; alpha *= 0.5) {
        const double h_trial = h - alpha * delta(N);
        if (!(h_trial > 0.0)) continue;
        std::vector<double> u_trial(u);
        for (int k = 0; k < N; ++k) u_trial[k] -= alpha * delta(k);
        DubinsRollout r = roll_dubins(from, u_trial, h_trial);
        const Eigen::Vector3d r_res = residual(r);
        if (r_res.norm() < res.norm()) {
          u = std::move(u_trial);
          h = h_trial;
          roll = std::move(r);
          res = r_res;
          improved = true;
        }
      }
      if (!improved) break;
      converged = res.norm() < 1e-11;
    }
    if (!converged) continue;

    Edge e;
    e.states = std::move(roll.states);
    e.controls = std::move(roll.controls);
    e.path_length = L;
    // Linearize at the unwrapped headings, then store wrapped states.
    fill_gains_and_steps(model, e, std::vector<double>(N, h));
    for (auto& s : e.states) s(2) = wrap_angle(s(2));
    return e;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(ModelKind k) {
  return k == ModelKind::Dubins ? "dubins" : "double_integrator";
}

ModelKind model_kind_from_string(std::string_view s) {
  if (s == "dubins") return ModelKind::Dubins;
  if (s == "double_integrator") return ModelKind::DoubleIntegrator2D;
  throw std::invalid_argument("unknown model kind '" + std::string(s) + "'");
}

void ModelSpec::validate() const {
  const int n = state_dim(), m = control_dim();
  if (!(dt > 0.0)) throw std::invalid_argument("model: dt must be positive");
  if (process_noise.rows() != n) throw std::invalid_argument("model: process noise must have one row per state");
  if (lqr_Q.rows() != n || lqr_Q.cols() != n) throw std::invalid_argument("model: Q has wrong dimensions");
  if (lqr_R.rows() != m || lqr_R.cols() != m) throw std::invalid_argument("model: R has wrong dimensions");
  if (min_eigenvalue(lqr_Q) < -1e-12) throw std::invalid_argument("model: Q must be positive semidefinite");
  if (!(min_eigenvalue(lqr_R) > 0.0)) throw std::invalid_argument("model: R must be positive definite");
  if (kind == ModelKind::Dubins && !(dubins_turn_radius > 0.0))
    throw std::invalid_argument("model: turn radius must be positive");
  if (!(steering_speed_scale > 0.0)) throw std::invalid_argument("model: steering speed scale must be positive");
  if (control_weight < 0.0) throw std::invalid_argument("model: control weight must be nonnegative");
}

ModelSpec default_model(ModelKind kind) {
  ModelSpec m;
  m.kind = kind;
  m.dt = 0.1;
  if (kind == ModelKind::DoubleIntegrator2D) {
    m.process_noise = Vec((Vec(4) << 0.03, 0.03, 0.02, 0.02).finished()).asDiagonal();
    m.lqr_Q = Vec((Vec(4) << 10.0, 10.0, 1.0, 1.0).finished()).asDiagonal();
    m.lqr_R = Mat::Identity(2, 2);
  } else {
    m.process_noise = 0.02 * Mat::Identity(3, 3);
    m.lqr_Q = 2.0 * Mat::Identity(3, 3);
    m.lqr_R = Mat::Identity(1, 1);
  }
  return m;
}

StateVec step_model(const ModelSpec& model, const StateVec& x, const Vec& u, double dt) {
  if (model.kind == ModelKind::DoubleIntegrator2D) return di_A(dt) * x + di_B(dt) * u;
  StateVec nx(3);
  nx << x(0) + std::cos(x(2)) * dt, x(1) + std::sin(x(2)) * dt, x(2) + u(0) * dt;
  return nx;
}

double stage_cost(const ModelSpec& model, const StateVec&, const Vec& u, double dt) {
  if (model.kind == ModelKind::DoubleIntegrator2D) return dt * (1.0 + model.control_weight * u.squaredNorm());
  return dt;  // unit speed: path length
}

std::optional<Edge> connect(const ModelSpec& model, const StateVec& xa, const StateVec& xb) {
  const int n = model.state_dim();
  if (xa.size() != n || xb.size() != n) throw std::invalid_argument("connect: state dimension mismatch");
  if (!xa.allFinite() || !xb.allFinite()) throw std::invalid_argument("connect: non-finite state");
  if ((state_error(model, xb, xa)).norm() == 0.0) return degenerate_edge(xa);
  return model.kind == ModelKind::Dubins ? connect_dubins(model, xa, xb)
                                         : connect_double_integrator(model, xa, xb);
}

std::vector<Mat> lqr_gains(const std::vector<Mat>& A, const std::vector<Mat>& B, const Mat& Q,
                           const Mat& R) {
  return lqr_gains(A, B, Q, R, nullptr);
}

std::vector<Mat> lqr_gains(const std::vector<Mat>& A, const std::vector<Mat>& B, const Mat& Q,
                           const Mat& R, std::vector<Mat>* value_matrices) {
  if (A.size() != B.size()) throw std::invalid_argument("lqr_gains: A and B sequences differ in length");
  if (Q.rows() != Q.cols() || R.rows() != R.cols()) throw std::invalid_argument("lqr_gains: Q and R must be square");
  Eigen::LLT<Mat> r_check(symmetrize(R));
  if (r_check.info() != Eigen::Success) throw std::invalid_argument("lqr_gains: R must be positive definite");
  const std::size_t N = A.size();
  std::vector<Mat> K(N);
  Mat S = symmetrize(Q);
  if (value_matrices) value_matrices->assign(N + 1, Mat());
  if (value_matrices) (*value_matrices)[N] = S;
  for (std::size_t i = N; i-- > 0;) {
    const Mat& Ak = A[i];
    const Mat& Bk = B[i];
    if (Ak.rows() != Q.rows() || Ak.cols() != Q.rows() || Bk.rows() != Q.rows() || Bk.cols() != R.rows())
      throw std::invalid_argument("lqr_gains: dimension mismatch at step " + std::to_string(i));
    const Mat BtS = Bk.transpose() * S;
    const Mat M = R + BtS * Bk;
    K[i] = -M.ldlt().solve(BtS * Ak);
    S = symmetrize(Q + Ak.transpose() * S * (Ak + Bk * K[i]));
    if (value_matrices) (*value_matrices)[i] = S;
  }
  return K;
}

std::vector<LtvStep> linearize(const ModelSpec& model, const std::vector<StateVec>& states,
                               const std::vector<Vec>& controls, const std::vector<double>& step_dt) {
  if (!states.empty() && controls.size() + 1 != states.size())
    throw std::invalid_argument("linearize: need exactly one control per transition");
  if (!step_dt.empty() && step_dt.size() != controls.size())
    throw std::invalid_argument("linearize: step durations do not match controls");
  const int n = model.state_dim();
  std::vector<LtvStep> out(controls.size());
  for (std::size_t k = 0; k < controls.size(); ++k) {
    const double dt = step_dt.empty() ? model.dt : step_dt[k];
    LtvStep& s = out[k];
    s.dt = dt;
    s.C = Mat::Identity(n, n);
    s.G = std::sqrt(dt) * model.process_noise;
    if (model.kind == ModelKind::DoubleIntegrator2D) {
      s.A = di_A(dt);
      s.B = di_B(dt);
    } else {
      const double th = states[k](2);
      s.A = Mat::Identity(3, 3);
      s.A(0, 2) = -std::sin(th) * dt;
      s.A(1, 2) = std::cos(th) * dt;
      s.B = Mat::Zero(3, 1);
      s.B(2, 0) = dt;
    }
  }
  return out;
}

StateVec state_error(const ModelSpec& model, const StateVec& x, const StateVec& y) {
  StateVec d = x - y;
  if (model.kind == ModelKind::Dubins) d(2) = wrap_angle(d(2));
  return d;
}

double state_distance(const ModelSpec& model, const StateVec& a, const StateVec& b) {
  const double pos = (a.head<2>() - b.head<2>()).norm();
  if (model.kind == ModelKind::DoubleIntegrator2D) return pos + 0.5 * (a.tail<2>() - b.tail<2>()).norm();
  return pos + 0.5 * model.dubins_turn_radius * std::abs(wrap_angle(a(2) - b(2)));
}

}  // namespace ibbt

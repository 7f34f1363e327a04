#include "ibbt/belief.hpp"

#include "ibbt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ibbt {
namespace {

// Mahalanobis clearance beyond which a step is not sampled: a 2D standard
// normal leaves the disc of radius 6 with probability exp(-18) ~ 1.5e-8.
constexpr double kScreenRadius = 6.0;

}  // namespace

KalmanStepResult kalman_step(const LtvStep& step, const Mat& K, const Mat& P_hat_prev, const Mat& P_tilde_prev) {
  const Mat& A = step.A;
  const Mat& C = step.C;
  const Mat& D = step.D;
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || P_hat_prev.rows() != n || P_tilde_prev.rows() != n || C.cols() != n ||
      D.rows() != C.rows() || step.B.rows() != n || K.rows() != step.B.cols() || K.cols() != n)
    throw std::invalid_argument("kalman_step: dimension mismatch");

  const Mat P_pred = symmetrize(A * P_tilde_prev * A.transpose() + step.G * step.G.transpose());
  const Mat S = symmetrize(C * P_pred * C.transpose() + D * D.transpose());
  Eigen::FullPivLU<Mat> lu(S);
  if (!lu.isInvertible()) throw DegenerateMeasurement("kalman_step: innovation covariance is singular");
  // L = P_pred C^T S^-1, with S and P_pred symmetric.
  const Mat CP = C * P_pred;
  const Mat L = lu.solve(CP).transpose();

  KalmanStepResult r;
  r.L = L;
  r.P_tilde = clamp_psd((Mat::Identity(n, n) - L * C) * P_pred);
  const Mat Acl = A + step.B * K;
  r.P_hat = clamp_psd(Acl * P_hat_prev * Acl.transpose() + L * CP);
  r.P = r.P_hat + r.P_tilde;
  return r;
}

NormalPool::NormalPool(std::uint64_t seed, int slice_size, std::size_t pool_size)
    : size_(std::max<std::size_t>(pool_size, static_cast<std::size_t>(slice_size))), slice_(slice_size) {
  if (slice_size < 1) throw std::invalid_argument("NormalPool: slice size must be positive");
  Rng rng(substream_seed(seed, 0x9e3779b9ULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  draws_.resize(size_ + static_cast<std::size_t>(slice_size));
  for (std::size_t i = 0; i < size_; ++i) {
    draws_[i].x() = normal(rng);
    draws_[i].y() = normal(rng);
  }
  std::copy(draws_.begin(), draws_.begin() + slice_size, draws_.begin() + static_cast<long>(size_));
}

const Vec2* NormalPool::slice(std::uint64_t key) const { return draws_.data() + mix_seed(key) % size_; }

double step_collision_probability(const Edge& edge, int step, const Mat& P, const Scenario& scenario,
                                  const PropagateOptions& options) {
  const Vec2 mean = position_of(edge.states[step]);
  const Mat2 cov = P.topLeftCorner<2, 2>();
  if (mahalanobis_clearance(mean, cov, scenario) >= kScreenRadius) return 0.0;
  const std::uint64_t key =
      substream_seed(options.seed, static_cast<std::uint64_t>(edge.id + 1), static_cast<std::uint64_t>(step));
  const int n = options.chance.mc_samples;
  if (options.draws && options.draws->slice_size() == n)
    return collision_probability(mean, cov, scenario, options.draws->slice(key), n);
  Rng rng(key);
  return collision_probability(mean, cov, scenario, n, rng);
}

PropagateResult propagate_edge(const Edge& edge, const BeliefNode& node, const Scenario& scenario,
                               const PropagateOptions& options) {
  BeliefNode out;
  out.vertex = edge.to;
  out.parent = node.id;
  out.in_edge = edge.id;
  out.h = 0.0;

  Mat P_tilde = node.P_tilde;
  Mat P_hat = clamp_psd(node.P - node.P_tilde);
  Mat P = node.P;
  double trace_sum = 0.0;
  const int N = static_cast<int>(edge.num_steps());
  const int stride = std::max(1, options.chance.check_stride);
  for (int k = 0; k < N; ++k) {
    LtvStep step = edge.steps[k];
    step.D = measurement_noise_at(position_of(edge.states[k + 1]), scenario);
    KalmanStepResult r = kalman_step(step, edge.gains[k], P_hat, P_tilde);
    P_hat = std::move(r.P_hat);
    P_tilde = std::move(r.P_tilde);
    P = std::move(r.P);
    trace_sum += P.trace() * step.dt;
    const int at = k + 1;
    if (at % stride == 0 || at == N) {
      const double p = step_collision_probability(edge, at, P, scenario, options);
      if (p >= options.chance.delta) return Infeasible{at, p};
    }
  }
  out.P = std::move(P);
  out.P_tilde = std::move(P_tilde);
  out.c = node.c + edge.nominal_cost + options.lambda_P * trace_sum;
  return out;
}

bool dominates(const BeliefNode& na, const BeliefNode& nb, double eps) {
  if (na.vertex != nb.vertex) throw std::invalid_argument("dominates: nodes belong to different vertices");
  if (na.f() == nb.f() && na.P == nb.P && na.P_tilde == nb.P_tilde) return false;
  return na.f() <= nb.f() + 1e-12 && loewner_leq(na.P, nb.P, eps) && loewner_leq(na.P_tilde, nb.P_tilde, eps);
}

bool equivalent(const BeliefNode& na, const BeliefNode& nb, double eps) {
  return std::abs(na.f() - nb.f()) <= 1e-12 && loewner_leq(na.P, nb.P, eps) && loewner_leq(nb.P, na.P, eps) &&
         loewner_leq(na.P_tilde, nb.P_tilde, eps) && loewner_leq(nb.P_tilde, na.P_tilde, eps);
}

}  // namespace ibbt

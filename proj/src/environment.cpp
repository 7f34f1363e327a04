#include "ibbt/environment.hpp"

#include "ibbt/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ibbt {
namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool in_any(const Vec2& p, const std::vector<Region>& regions) {
  for (const auto& r : regions)
    if (r.contains(p)) return true;
  return false;
}

bool is_positive_diagonal(const Mat& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if ((i == j && !(m(i, j) > 0.0)) || (i != j && m(i, j) != 0.0)) return false;
  return true;
}

}  // namespace

bool Region::contains(const Vec2& p) const {
  if (p.x() < lo.x() || p.x() > hi.x() || p.y() < lo.y() || p.y() > hi.y()) return false;
  // Vertices are stored counter-clockwise.
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % n];
    if (cross(b - a, p - a) < 0.0) return false;
  }
  return true;
}

Region make_region(std::vector<Vec2> vertices) {
  if (vertices.size() < 3) throw std::invalid_argument("region needs at least three vertices");
  double area2 = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    area2 += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
  if (area2 == 0.0) throw std::invalid_argument("region has zero area");
  if (area2 < 0.0) std::reverse(vertices.begin(), vertices.end());
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % n];
    const Vec2& c = vertices[(i + 2) % n];
    if (cross(b - a, c - b) < 0.0) throw std::invalid_argument("region is not convex");
  }
  Region r;
  r.lo = r.hi = vertices.front();
  for (const auto& v : vertices) {
    r.lo = r.lo.cwiseMin(v);
    r.hi = r.hi.cwiseMax(v);
  }
  r.vertices = std::move(vertices);
  return r;
}

Region make_rectangle(double x0, double y0, double x1, double y1) {
  return make_region({Vec2(x0, y0), Vec2(x1, y0), Vec2(x1, y1), Vec2(x0, y1)});
}

NoiseSpec default_noise(ModelKind kind) {
  if (kind == ModelKind::Dubins) return {0.1 * Mat::Identity(3, 3), 2.0 * Mat::Identity(3, 3)};
  return {0.01 * Mat::Identity(4, 4), Mat::Identity(4, 4)};
}

void ChanceConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("chance: delta must lie in (0, 1)");
  if (mc_samples < 100) throw std::invalid_argument("chance: mc_samples must be at least 100");
  if (check_stride < 1) throw std::invalid_argument("chance: check_stride must be at least 1");
}

std::vector<std::string> Scenario::violations() const {
  std::vector<std::string> out;
  const int n = model.state_dim();
  try {
    model.validate();
  } catch (const std::exception& e) {
    out.emplace_back(e.what());
  }
  if (!(bounds.hi.x() > bounds.lo.x() && bounds.hi.y() > bounds.lo.y()))
    out.emplace_back("bounds: max must exceed min on both axes");
  if (start.size() != n) out.emplace_back("start.state: expected " + std::to_string(n) + " entries");
  if (goal.size() != n) out.emplace_back("goal: expected " + std::to_string(n) + " entries");
  if (P0.rows() != n || P0.cols() != n) out.emplace_back("start.P0: expected a square matrix of the state dimension");
  if (P_tilde0.rows() != n || P_tilde0.cols() != n)
    out.emplace_back("start.Ptilde0: expected a square matrix of the state dimension");
  if (!(delta > 0.0 && delta < 1.0)) out.emplace_back("delta: must lie in (0, 1)");
  if (!is_positive_diagonal(noise.D_info) || noise.D_info.rows() != n)
    out.emplace_back("model.D_info: must be a positive diagonal matrix of the state dimension");
  if (!is_positive_diagonal(noise.D_default) || noise.D_default.rows() != n)
    out.emplace_back("model.D_default: must be a positive diagonal matrix of the state dimension");
  if (!(velocity_box > 0.0)) out.emplace_back("velocity_box: must be positive");
  if (!out.empty()) return out;

  auto check_point = [&](const StateVec& x, const std::string& what) {
    const Vec2 p = position_of(x);
    if (!bounds.contains(p)) out.push_back(what + " lies outside the workspace bounds");
    for (std::size_t i = 0; i < obstacles.size(); ++i)
      if (obstacles[i].contains(p)) out.push_back(what + " lies inside obstacle " + std::to_string(i));
  };
  check_point(start, "start");
  check_point(goal, "goal");
  if (min_eigenvalue(P_tilde0) < -1e-12) out.emplace_back("start.Ptilde0: must be positive semidefinite");
  if (min_eigenvalue(P0 - P_tilde0) < -1e-12) out.emplace_back("start: P0 - Ptilde0 must be positive semidefinite");
  return out;
}

bool point_free(const Vec2& p, const Scenario& scenario) {
  return scenario.bounds.contains(p) && !in_any(p, scenario.obstacles);
}

bool obstacle_free(const std::vector<StateVec>& traj, const Scenario& scenario) {
  for (const auto& x : traj)
    if (!point_free(position_of(x), scenario)) return false;
  return true;
}

double collision_probability(const Vec2& mean, const Mat2& cov, const Scenario& scenario, int samples,
                             Rng& rng) {
  if (samples < 1) throw std::invalid_argument("collision_probability: need at least one sample");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vec2> z(samples);
  for (auto& d : z) {
    d.x() = normal(rng);
    d.y() = normal(rng);
  }
  return collision_probability(mean, cov, scenario, z.data(), samples);
}

double collision_probability(const Vec2& mean, const Mat2& cov, const Scenario& scenario, const Vec2* draws,
                             int samples) {
  if (samples < 1) throw std::invalid_argument("collision_probability: need at least one sample");
  if (min_eigenvalue(cov) < -1e-9) throw std::invalid_argument("collision_probability: covariance is not PSD");
  const Mat2 F = psd_factor(cov);
  int hits = 0;
  for (int i = 0; i < samples; ++i)
    if (!point_free(mean + F * draws[i], scenario)) ++hits;
  return static_cast<double>(hits) / samples;
}

double mahalanobis_clearance(const Vec2& mean, const Mat2& cov, const Scenario& scenario) {
  if (!point_free(mean, scenario)) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (cov + cov.transpose()));
  if (!(es.eigenvalues()(0) > 1e-300)) return 0.0;
  const Bounds& b = scenario.bounds;
  const double sx = std::sqrt(cov(0, 0)), sy = std::sqrt(cov(1, 1));
  double best = std::min({(mean.x() - b.lo.x()) / sx, (b.hi.x() - mean.x()) / sx, (mean.y() - b.lo.y()) / sy,
                          (b.hi.y() - mean.y()) / sy});
  // Whitening W = Lambda^-1/2 V^T keeps orientation up to a reflection, which
  // does not change distances.
  const Mat2 W = es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  for (const auto& o : scenario.obstacles) {
    const std::size_t n = o.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 a = W * (o.vertices[i] - mean);
      const Vec2 c = W * (o.vertices[(i + 1) % n] - mean);
      const Vec2 ab = c - a;
      const double t = std::clamp(-a.dot(ab) / ab.squaredNorm(), 0.0, 1.0);
      best = std::min(best, (a + t * ab).norm());
    }
  }
  return std::max(best, 0.0);
}

const Mat& measurement_noise_at(const Vec2& pos, const Scenario& scenario) {
  return in_any(pos, scenario.info_regions) ? scenario.noise.D_info : scenario.noise.D_default;
}

StateVec sample_free(const Scenario& scenario, const Uniform01& uniform) {
  const Bounds& b = scenario.bounds;
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const Vec2 p(b.lo.x() + uniform() * (b.hi.x() - b.lo.x()), b.lo.y() + uniform() * (b.hi.y() - b.lo.y()));
    if (in_any(p, scenario.obstacles)) continue;
    StateVec x(scenario.model.state_dim());
    x(0) = p.x();
    x(1) = p.y();
    if (scenario.model.kind == ModelKind::DoubleIntegrator2D) {
      x(2) = scenario.velocity_box * (2.0 * uniform() - 1.0);
      x(3) = scenario.velocity_box * (2.0 * uniform() - 1.0);
    } else {
      x(2) = M_PI - 2.0 * M_PI * uniform();  // (-pi, pi]
    }
    return x;
  }
  throw std::runtime_error("sample_free: rejection budget exhausted; free space is too small");
}

StateVec sample_free(const Scenario& scenario, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return sample_free(scenario, [&] { return unit(rng); });
}

}  // namespace ibbt

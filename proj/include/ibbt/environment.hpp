#pragma once

#include "ibbt/dynamics.hpp"
#include "ibbt/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace ibbt {

/// Convex polygon with a cached bounding box.
struct Region {
  std::vector<Vec2> vertices;
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Zero();

  /// Closed point-in-polygon test (boundary counts as inside).
  bool contains(const Vec2& p) const;
};

/// Builds a region from a convex polygon; throws if it is degenerate or non-convex.
Region make_region(std::vector<Vec2> vertices);
Region make_rectangle(double x0, double y0, double x1, double y1);

struct Bounds {
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Ones();

  bool contains(const Vec2& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
  }
  double area() const { return (hi - lo).prod(); }
  double diagonal() const { return (hi - lo).norm(); }
};

struct NoiseSpec {
  Mat D_info;
  Mat D_default;
};

/// Default measurement-noise values for a model kind.
NoiseSpec default_noise(ModelKind kind);

struct ChanceConfig {
  double delta = 0.05;
  int mc_samples = 1000;
  int check_stride = 1;

  void validate() const;
};

struct Scenario {
  std::string name;
  Bounds bounds;
  std::vector<Region> obstacles;
  std::vector<Region> info_regions;
  StateVec start;
  Mat P0;
  Mat P_tilde0;
  StateVec goal;
  double delta = 0.05;
  ModelSpec model;
  NoiseSpec noise;
  double velocity_box = 1.0;  // double-integrator velocity sampling half-width, m/s

  /// Collects every violated invariant; empty when valid.
  std::vector<std::string> violations() const;
};

inline Vec2 position_of(const StateVec& x) { return x.head<2>(); }

/// True when `p` is inside the workspace and outside every obstacle.
bool point_free(const Vec2& p, const Scenario& scenario);

/// Every state's position lies in bounds and outside all obstacles.
bool obstacle_free(const std::vector<StateVec>& traj, const Scenario& scenario);

/// Monte-Carlo estimate of P(position in an obstacle or out of bounds).
double collision_probability(const Vec2& mean, const Mat2& cov, const Scenario& scenario, int samples,
                             Rng& rng);

/// Same estimate from caller-supplied standard-normal draws z, mapped to
/// mean + F z with F F^T = cov.
double collision_probability(const Vec2& mean, const Mat2& cov, const Scenario& scenario, const Vec2* draws,
                             int samples);

/// Smallest Mahalanobis distance from `mean` to any obstacle or to the
/// outside of the workspace; 0 when `mean` is not free or `cov` is singular.
double mahalanobis_clearance(const Vec2& mean, const Mat2& cov, const Scenario& scenario);

/// D_info inside any info region (closed), D_default elsewhere.
const Mat& measurement_noise_at(const Vec2& pos, const Scenario& scenario);

/// Uniform source on [0, 1).
using Uniform01 = std::function<double()>;

/// Rejection sampling of a collision-free state; throws after 1e5 rejected draws.
StateVec sample_free(const Scenario& scenario, const Uniform01& uniform);
StateVec sample_free(const Scenario& scenario, Rng& rng);

}  // namespace ibbt

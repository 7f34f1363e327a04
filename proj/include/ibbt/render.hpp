#pragma once

#include "ibbt/environment.hpp"
#include "ibbt/planner.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace ibbt {

/// sqrt of the 95% chi-square quantile with two degrees of freedom.
double confidence95_scale();

/// Semi-axes (major first) and major-axis angle of the 95% ellipse of a 2x2
/// covariance.
struct EllipseAxes {
  double major = 0.0;
  double minor = 0.0;
  double angle_deg = 0.0;
};
EllipseAxes ellipse_axes(const Mat2& cov);

struct GaussianMarker {
  Vec2 mean = Vec2::Zero();
  Mat2 cov = Mat2::Zero();
};

/// Everything drawn in one picture, in workspace coordinates.
struct RenderScene {
  Scenario scenario;
  std::vector<std::vector<Vec2>> graph_edges;
  std::vector<GaussianMarker> tree;
  std::vector<Vec2> solution;
  std::vector<GaussianMarker> solution_beliefs;
  std::vector<std::vector<Vec2>> rollouts;
};

RenderScene scene_from_planner(const Planner& planner, const std::vector<PathStep>& path);
RenderScene scene_from_result(const nlohmann::json& result);

/// Standalone SVG document.
std::string render_svg(const RenderScene& scene);

}  // namespace ibbt

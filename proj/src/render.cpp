#include "ibbt/render.hpp"

#include "ibbt/result_io.hpp"
#include "ibbt/scenario_io.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace ibbt {

using nlohmann::json;

namespace {

constexpr double kCanvas = 800.0;  // pixels along the longer workspace side
constexpr double kMargin = 20.0;
constexpr std::size_t kEdgePoints = 8;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<Vec2> decimate(const std::vector<StateVec>& states) {
  std::vector<Vec2> out;
  const std::size_t n = states.size();
  const std::size_t stride = std::max<std::size_t>(1, n / kEdgePoints);
  for (std::size_t i = 0; i < n; i += stride) out.push_back(position_of(states[i]));
  if ((n - 1) % stride != 0) out.push_back(position_of(states.back()));
  return out;
}

void polygon(std::ostream& os, const Region& r, const char* fill, const char* stroke) {
  os << "<polygon points=\"";
  for (std::size_t i = 0; i < r.vertices.size(); ++i)
    os << (i ? " " : "") << fmt(r.vertices[i].x()) << ',' << fmt(r.vertices[i].y());
  os << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\" vector-effect=\"non-scaling-stroke\"/>\n";
}

void polyline(std::ostream& os, const std::vector<Vec2>& pts, const char* stroke, double width, double opacity) {
  if (pts.size() < 2) return;
  os << "<polyline points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) os << (i ? " " : "") << fmt(pts[i].x()) << ',' << fmt(pts[i].y());
  os << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << fmt(width) << "\" stroke-opacity=\""
     << fmt(opacity) << "\" vector-effect=\"non-scaling-stroke\"/>\n";
}

void ellipse(std::ostream& os, const GaussianMarker& g, const char* stroke) {
  const EllipseAxes a = ellipse_axes(g.cov);
  os << "<ellipse cx=\"0\" cy=\"0\" rx=\"" << fmt(a.major) << "\" ry=\"" << fmt(a.minor) << "\" transform=\"translate("
     << fmt(g.mean.x()) << ',' << fmt(g.mean.y()) << ") rotate(" << fmt(a.angle_deg) << ")\" fill=\"none\" stroke=\""
     << stroke << "\" vector-effect=\"non-scaling-stroke\"/>\n";
}

Vec2 pt(const json& j) { return Vec2(j.at(0).get<double>(), j.at(1).get<double>()); }

}  // namespace

double confidence95_scale() { return std::sqrt(-2.0 * std::log(0.05)); }

EllipseAxes ellipse_axes(const Mat2& cov) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (cov + cov.transpose()));
  const Vec2 lam = es.eigenvalues().cwiseMax(0.0);  // ascending
  const Vec2 major_dir = es.eigenvectors().col(1);
  EllipseAxes a;
  a.major = confidence95_scale() * std::sqrt(lam(1));
  a.minor = confidence95_scale() * std::sqrt(lam(0));
  a.angle_deg = std::atan2(major_dir.y(), major_dir.x()) * 180.0 / M_PI;
  return a;
}

RenderScene scene_from_planner(const Planner& planner, const std::vector<PathStep>& path) {
  RenderScene s;
  s.scenario = planner.scenario();
  const Graph& g = planner.graph();
  for (const auto& e : g.edges()) s.graph_edges.push_back(decimate(e.states));
  planner.tree().for_each([&](const BeliefNode& n) {
    s.tree.push_back({position_of(g.vertex(n.vertex).x), n.P.topLeftCorner<2, 2>()});
  });
  for (const auto& x : solution_trajectory(g, path)) s.solution.push_back(position_of(x));
  for (const auto& st : path) s.solution_beliefs.push_back({position_of(st.x), st.P.topLeftCorner<2, 2>()});
  return s;
}

RenderScene scene_from_result(const json& result) {
  RenderScene s;
  s.scenario = scenario_from_json(result.at("scenario")).scenario;
  const json& verts = result.at("graph").at("vertices");
  for (const auto& e : result.at("graph").at("edges"))
    s.graph_edges.push_back({pt(verts.at(e.at(0).get<std::size_t>())), pt(verts.at(e.at(1).get<std::size_t>()))});
  for (const auto& t : result.at("tree")) {
    Mat2 c;
    c << t.at(2).get<double>(), t.at(3).get<double>(), t.at(3).get<double>(), t.at(4).get<double>();
    s.tree.push_back({pt(t), c});
  }
  for (const auto& x : result.at("trajectory")) s.solution.push_back(pt(x));
  for (const auto& st : result.at("path")) {
    const json& P = st.at("P");
    Mat2 c;
    c << P.at(0).at(0).get<double>(), P.at(0).at(1).get<double>(), P.at(1).at(0).get<double>(),
        P.at(1).at(1).get<double>();
    s.solution_beliefs.push_back({pt(st.at("x")), c});
  }
  return s;
}

std::string render_svg(const RenderScene& scene) {
  const Bounds& b = scene.scenario.bounds;
  const Vec2 ext = b.hi - b.lo;
  const double scale = kCanvas / ext.maxCoeff();
  const double w = ext.x() * scale + 2 * kMargin;
  const double h = ext.y() * scale + 2 * kMargin;

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
     << "\" viewBox=\"0 0 " << fmt(w) << ' ' << fmt(h) << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << fmt(w) << "\" height=\"" << fmt(h) << "\" fill=\"white\"/>\n";
  // Workspace frame: y up, one unit per meter.
  os << "<g transform=\"translate(" << fmt(kMargin) << ',' << fmt(h - kMargin) << ") scale(" << fmt(scale) << ','
     << fmt(-scale) << ") translate(" << fmt(-b.lo.x()) << ',' << fmt(-b.lo.y()) << ")\">\n";
  os << "<rect x=\"" << fmt(b.lo.x()) << "\" y=\"" << fmt(b.lo.y()) << "\" width=\"" << fmt(ext.x())
     << "\" height=\"" << fmt(ext.y()) << "\" fill=\"none\" stroke=\"black\" vector-effect=\"non-scaling-stroke\"/>\n";

  os << "<g id=\"info_regions\">\n";
  for (const auto& r : scene.scenario.info_regions) polygon(os, r, "#9ecae1", "#3182bd");
  os << "</g>\n<g id=\"obstacles\">\n";
  for (const auto& r : scene.scenario.obstacles) polygon(os, r, "#969696", "#636363");
  os << "</g>\n<g id=\"graph\">\n";
  for (const auto& e : scene.graph_edges) polyline(os, e, "#bdbdbd", 0.5, 0.6);
  os << "</g>\n<g id=\"tree\">\n";
  for (const auto& g : scene.tree) ellipse(os, g, "#fdae6b");
  os << "</g>\n<g id=\"rollouts\">\n";
  for (const auto& r : scene.rollouts) polyline(os, r, "#737373", 0.5, 0.4);
  os << "</g>\n<g id=\"solution\">\n";
  polyline(os, scene.solution, "#31a354", 2.0, 1.0);
  for (const auto& g : scene.solution_beliefs) ellipse(os, g, "#006d2c");
  os << "</g>\n";

  auto marker = [&](const StateVec& x, const char* color) {
    os << "<circle cx=\"" << fmt(x(0)) << "\" cy=\"" << fmt(x(1)) << "\" r=\"" << fmt(4.0 / scale) << "\" fill=\""
       << color << "\"/>\n";
  };
  if (scene.scenario.start.size() >= 2) marker(scene.scenario.start, "#2171b5");
  if (scene.scenario.goal.size() >= 2) marker(scene.scenario.goal, "#cb181d");
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace ibbt

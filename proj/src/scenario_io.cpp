#include "ibbt/scenario_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace ibbt {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ScenarioParseError(field + ": " + what);
}

void reject_unknown(const json& obj, const std::string& field, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(field, "expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) fail(field.empty() ? key : field + "." + key, "unknown key");
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  return j.get<int>();
}

Vec vector_of(const json& j, int n, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array");
  if (n >= 0 && static_cast<int>(j.size()) != n) fail(field, "expected " + std::to_string(n) + " entries");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = number(j[i], field + "[" + std::to_string(i) + "]");
  return v;
}

Vec2 point(const json& j, const std::string& field) { return vector_of(j, 2, field); }

std::vector<Region> regions(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of polygons");
  std::vector<Region> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    if (!j[i].is_array()) fail(f, "expected an array of [x, y] points");
    std::vector<Vec2> pts;
    for (std::size_t k = 0; k < j[i].size(); ++k) pts.push_back(point(j[i][k], f + "[" + std::to_string(k) + "]"));
    try {
      out.push_back(make_region(std::move(pts)));
    } catch (const std::invalid_argument& e) {
      fail(f, e.what());
    }
  }
  return out;
}

json region_json(const Region& r) {
  json pts = json::array();
  for (const auto& v : r.vertices) pts.push_back({v.x(), v.y()});
  return pts;
}

json vector_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace

ScenarioValidationError::ScenarioValidationError(std::vector<std::string> v)
    : std::runtime_error([&] {
        std::string msg = "invalid scenario:";
        for (const auto& s : v) msg += "\n  - " + s;
        return msg;
      }()),
      violations(std::move(v)) {}

Mat matrix_from_json(const json& j, int rows, int cols, const std::string& field) {
  if (j.is_number()) {
    if (rows != cols) fail(field, "a scalar encodes a square matrix");
    return j.get<double>() * Mat::Identity(rows, cols);
  }
  if (!j.is_array()) fail(field, "expected a number, a diagonal array or nested rows");
  if (!j.empty() && j[0].is_array()) {
    if (static_cast<int>(j.size()) != rows) fail(field, "expected " + std::to_string(rows) + " rows");
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) m.row(r) = vector_of(j[r], cols, field + "[" + std::to_string(r) + "]");
    return m;
  }
  if (rows != cols) fail(field, "a diagonal encodes a square matrix");
  return vector_of(j, rows, field).asDiagonal();
}

json matrix_to_json(const Mat& m) {
  if (m.rows() == m.cols() && m.isDiagonal(0.0)) return vector_json(m.diagonal());
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) rows.push_back(vector_json(m.row(r).transpose()));
  return rows;
}

ScenarioFile scenario_from_json(const json& j) {
  reject_unknown(j, "", {"name", "bounds", "obstacles", "info_regions", "start", "goal", "delta", "model", "planner"});
  for (const char* key : {"bounds", "start", "goal", "model"})
    if (!j.contains(key)) fail(key, "required key missing");

  ScenarioFile out;
  Scenario& s = out.scenario;
  if (j.contains("name")) {
    if (!j["name"].is_string()) fail("name", "expected a string");
    s.name = j["name"].get<std::string>();
  }

  const json& m = j["model"];
  reject_unknown(m, "model", {"kind", "dt", "G", "Q", "R", "D_info", "D_default", "turn_radius",
                              "steering_speed_scale", "control_weight", "velocity_box"});
  if (!m.contains("kind") || !m["kind"].is_string()) fail("model.kind", "expected \"double_integrator\" or \"dubins\"");
  try {
    s.model = default_model(model_kind_from_string(m["kind"].get<std::string>()));
  } catch (const std::invalid_argument& e) {
    fail("model.kind", e.what());
  }
  const int nx = s.model.state_dim();
  const int nu = s.model.control_dim();
  s.noise = default_noise(s.model.kind);
  if (m.contains("dt")) s.model.dt = number(m["dt"], "model.dt");
  if (m.contains("G")) s.model.process_noise = matrix_from_json(m["G"], nx, nx, "model.G");
  if (m.contains("Q")) s.model.lqr_Q = matrix_from_json(m["Q"], nx, nx, "model.Q");
  if (m.contains("R")) s.model.lqr_R = matrix_from_json(m["R"], nu, nu, "model.R");
  if (m.contains("D_info")) s.noise.D_info = matrix_from_json(m["D_info"], nx, nx, "model.D_info");
  if (m.contains("D_default")) s.noise.D_default = matrix_from_json(m["D_default"], nx, nx, "model.D_default");
  if (m.contains("turn_radius")) s.model.dubins_turn_radius = number(m["turn_radius"], "model.turn_radius");
  if (m.contains("steering_speed_scale"))
    s.model.steering_speed_scale = number(m["steering_speed_scale"], "model.steering_speed_scale");
  if (m.contains("control_weight")) s.model.control_weight = number(m["control_weight"], "model.control_weight");
  if (m.contains("velocity_box")) s.velocity_box = number(m["velocity_box"], "model.velocity_box");

  const json& b = j["bounds"];
  reject_unknown(b, "bounds", {"lo", "hi"});
  if (!b.contains("lo") || !b.contains("hi")) fail("bounds", "expected lo and hi corners");
  s.bounds.lo = point(b["lo"], "bounds.lo");
  s.bounds.hi = point(b["hi"], "bounds.hi");

  if (j.contains("obstacles")) s.obstacles = regions(j["obstacles"], "obstacles");
  if (j.contains("info_regions")) s.info_regions = regions(j["info_regions"], "info_regions");

  const json& st = j["start"];
  reject_unknown(st, "start", {"state", "P0", "Ptilde0"});
  if (!st.contains("state")) fail("start.state", "required key missing");
  s.start = vector_of(st["state"], nx, "start.state");
  s.P0 = st.contains("P0") ? matrix_from_json(st["P0"], nx, nx, "start.P0") : Mat(0.01 * Mat::Identity(nx, nx));
  s.P_tilde0 = st.contains("Ptilde0") ? matrix_from_json(st["Ptilde0"], nx, nx, "start.Ptilde0") : s.P0;
  s.goal = vector_of(j["goal"], nx, "goal");
  if (j.contains("delta")) s.delta = number(j["delta"], "delta");

  PlannerConfig& c = out.config;
  if (j.contains("planner")) {
    const json& p = j["planner"];
    reject_unknown(p, "planner", {"mode", "batch_size", "eps_dominance", "max_seconds", "max_batches", "seed",
                                  "lambda_P", "mc_samples", "check_stride", "near_gamma", "near_r_max",
                                  "stop_on_first_solution"});
    if (p.contains("mode")) {
      if (!p["mode"].is_string()) fail("planner.mode", "expected a string");
      try {
        c.mode = planner_mode_from_string(p["mode"].get<std::string>());
      } catch (const std::invalid_argument& e) {
        fail("planner.mode", e.what());
      }
    }
    if (p.contains("batch_size")) c.batch_size = integer(p["batch_size"], "planner.batch_size");
    if (p.contains("eps_dominance")) c.eps_dominance = number(p["eps_dominance"], "planner.eps_dominance");
    if (p.contains("max_seconds")) c.max_seconds = number(p["max_seconds"], "planner.max_seconds");
    if (p.contains("max_batches")) c.max_batches = integer(p["max_batches"], "planner.max_batches");
    if (p.contains("seed")) {
      if (!p["seed"].is_number_unsigned()) fail("planner.seed", "expected a nonnegative integer");
      c.seed = p["seed"].get<std::uint64_t>();
    }
    if (p.contains("lambda_P")) c.lambda_P = number(p["lambda_P"], "planner.lambda_P");
    if (p.contains("mc_samples")) c.chance.mc_samples = integer(p["mc_samples"], "planner.mc_samples");
    if (p.contains("check_stride")) c.chance.check_stride = integer(p["check_stride"], "planner.check_stride");
    if (p.contains("near_gamma")) c.near_gamma = number(p["near_gamma"], "planner.near_gamma");
    if (p.contains("near_r_max")) c.near_r_max = number(p["near_r_max"], "planner.near_r_max");
    if (p.contains("stop_on_first_solution")) {
      if (!p["stop_on_first_solution"].is_boolean()) fail("planner.stop_on_first_solution", "expected a boolean");
      c.stop_on_first_solution = p["stop_on_first_solution"].get<bool>();
    }
  }
  c.chance.delta = s.delta;

  std::vector<std::string> problems = s.violations();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    problems.emplace_back(e.what());
  }
  if (!problems.empty()) throw ScenarioValidationError(std::move(problems));
  return out;
}

ScenarioFile parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << "line " << line_of(text, e.byte) << ": " << e.what();
    throw ScenarioParseError(msg.str());
  }
  return scenario_from_json(j);
}

ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParseError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const ScenarioParseError& e) {
    throw ScenarioParseError(path + ": " + e.what());
  }
}

json scenario_to_json(const ScenarioFile& file) {
  const Scenario& s = file.scenario;
  const PlannerConfig& c = file.config;
  json j;
  j["name"] = s.name;
  j["bounds"] = {{"lo", vector_json(s.bounds.lo)}, {"hi", vector_json(s.bounds.hi)}};
  j["obstacles"] = json::array();
  for (const auto& r : s.obstacles) j["obstacles"].push_back(region_json(r));
  j["info_regions"] = json::array();
  for (const auto& r : s.info_regions) j["info_regions"].push_back(region_json(r));
  j["start"] = {{"state", vector_json(s.start)}, {"P0", matrix_to_json(s.P0)}, {"Ptilde0", matrix_to_json(s.P_tilde0)}};
  j["goal"] = vector_json(s.goal);
  j["delta"] = s.delta;
  j["model"] = {{"kind", std::string(to_string(s.model.kind))},
                {"dt", s.model.dt},
                {"G", matrix_to_json(s.model.process_noise)},
                {"Q", matrix_to_json(s.model.lqr_Q)},
                {"R", matrix_to_json(s.model.lqr_R)},
                {"D_info", matrix_to_json(s.noise.D_info)},
                {"D_default", matrix_to_json(s.noise.D_default)},
                {"turn_radius", s.model.dubins_turn_radius},
                {"steering_speed_scale", s.model.steering_speed_scale},
                {"control_weight", s.model.control_weight},
                {"velocity_box", s.velocity_box}};
  json p = {{"mode", std::string(to_string(c.mode))},
            {"batch_size", c.batch_size},
            {"eps_dominance", c.eps_dominance},
            {"max_seconds", c.max_seconds},
            {"max_batches", c.max_batches},
            {"seed", c.seed},
            {"lambda_P", c.lambda_P},
            {"mc_samples", c.chance.mc_samples},
            {"check_stride", c.chance.check_stride},
            {"stop_on_first_solution", c.stop_on_first_solution}};
  if (c.near_gamma) p["near_gamma"] = *c.near_gamma;
  if (c.near_r_max) p["near_r_max"] = *c.near_r_max;
  j["planner"] = std::move(p);
  return j;
}

std::string write_scenario(const ScenarioFile& file) { return scenario_to_json(file).dump(2) + "\n"; }

}  // namespace ibbt

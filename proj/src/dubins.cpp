#include "ibbt/dubins.hpp"

#include <cmath>
#include <stdexcept>

namespace ibbt {
namespace {

double mod2pi(double a) {
  double r = std::fmod(a, 2.0 * M_PI);
  if (r < 0.0) r += 2.0 * M_PI;
  if (r >= 2.0 * M_PI) r = 0.0;
  return r;
}

// Normalized-frame solutions: the start sits at the origin heading alpha, the
// goal at (d, 0) heading beta, all lengths in units of the turn radius.
struct Normalized {
  double alpha, beta, d;
  double sa, ca, sb, cb, cab;
};

std::optional<std::array<double, 3>> solve_word(const Normalized& n, DubinsWord w) {
  const double a = n.alpha, b = n.beta, d = n.d;
  const double sa = n.sa, ca = n.ca, sb = n.sb, cb = n.cb, cab = n.cab;
  switch (w) {
    case DubinsWord::LSL: {
      double p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sa - sb);
      if (p2 < 0.0) return std::nullopt;
      double th = std::atan2(cb - ca, d + sa - sb);
      return std::array<double, 3>{mod2pi(th - a), std::sqrt(p2), mod2pi(b - th)};
    }
    case DubinsWord::RSR: {
      double p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sb - sa);
      if (p2 < 0.0) return std::nullopt;
      double th = std::atan2(ca - cb, d - sa + sb);
      return std::array<double, 3>{mod2pi(a - th), std::sqrt(p2), mod2pi(th - b)};
    }
    case DubinsWord::LSR: {
      double p2 = -2.0 + d * d + 2.0 * cab + 2.0 * d * (sa + sb);
      if (p2 < 0.0) return std::nullopt;
      double p = std::sqrt(p2);
      double th = std::atan2(-ca - cb, d + sa + sb) - std::atan2(-2.0, p);
      return std::array<double, 3>{mod2pi(th - a), p, mod2pi(th - b)};
    }
    case DubinsWord::RSL: {
      double p2 = -2.0 + d * d + 2.0 * cab - 2.0 * d * (sa + sb);
      if (p2 < 0.0) return std::nullopt;
      double p = std::sqrt(p2);
      double th = std::atan2(ca + cb, d - sa - sb) - std::atan2(2.0, p);
      return std::array<double, 3>{mod2pi(a - th), p, mod2pi(b - th)};
    }
    case DubinsWord::RLR: {
      double c = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sa - sb)) / 8.0;
      if (std::abs(c) > 1.0) return std::nullopt;
      double phi = std::atan2(ca - cb, d - sa + sb);
      double p = mod2pi(2.0 * M_PI - std::acos(c));
      double t = mod2pi(a - phi + mod2pi(p / 2.0));
      return std::array<double, 3>{t, p, mod2pi(a - b - t + mod2pi(p))};
    }
    case DubinsWord::LRL: {
      double c = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sb - sa)) / 8.0;
      if (std::abs(c) > 1.0) return std::nullopt;
      double phi = std::atan2(ca - cb, d + sa - sb);
      double p = mod2pi(2.0 * M_PI - std::acos(c));
      double t = mod2pi(-a - phi + p / 2.0);
      return std::array<double, 3>{t, p, mod2pi(mod2pi(b) - a - t + mod2pi(p))};
    }
  }
  return std::nullopt;
}

Normalized normalize(const Eigen::Vector3d& from, const Eigen::Vector3d& to, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("dubins: turn radius must be positive");
  const double dx = to.x() - from.x();
  const double dy = to.y() - from.y();
  const double dist = std::hypot(dx, dy);
  const double th = dist > 0.0 ? mod2pi(std::atan2(dy, dx)) : 0.0;
  Normalized n{};
  n.d = dist / radius;
  n.alpha = mod2pi(from.z() - th);
  n.beta = mod2pi(to.z() - th);
  n.sa = std::sin(n.alpha);
  n.ca = std::cos(n.alpha);
  n.sb = std::sin(n.beta);
  n.cb = std::cos(n.beta);
  n.cab = std::cos(n.alpha - n.beta);
  return n;
}

}  // namespace

std::string_view to_string(DubinsWord w) {
  switch (w) {
    case DubinsWord::LSL: return "LSL";
    case DubinsWord::RSR: return "RSR";
    case DubinsWord::LSR: return "LSR";
    case DubinsWord::RSL: return "RSL";
    case DubinsWord::RLR: return "RLR";
    case DubinsWord::LRL: return "LRL";
  }
  return "?";
}

std::array<int, 3> segment_turns(DubinsWord w) {
  switch (w) {
    case DubinsWord::LSL: return {1, 0, 1};
    case DubinsWord::RSR: return {-1, 0, -1};
    case DubinsWord::LSR: return {1, 0, -1};
    case DubinsWord::RSL: return {-1, 0, 1};
    case DubinsWord::RLR: return {-1, 1, -1};
    case DubinsWord::LRL: return {1, -1, 1};
  }
  return {0, 0, 0};
}

Eigen::Vector3d advance_segment(const Eigen::Vector3d& pose, int turn, double length, double radius) {
  const double th = pose.z();
  if (turn == 0) {
    return {pose.x() + length * std::cos(th), pose.y() + length * std::sin(th), th};
  }
  const double dth = turn * length / radius;
  const double r = turn * radius;
  return {pose.x() + r * (std::sin(th + dth) - std::sin(th)),
          pose.y() - r * (std::cos(th + dth) - std::cos(th)), th + dth};
}

Eigen::Vector3d DubinsPath::pose_at(double s) const {
  const auto turns = segment_turns(word);
  Eigen::Vector3d pose = start;
  double remaining = std::max(0.0, s);
  for (int i = 0; i < 3; ++i) {
    const double step = std::min(remaining, segments[i]);
    pose = advance_segment(pose, turns[i], step, radius);
    remaining -= step;
    if (remaining <= 0.0) break;
  }
  if (remaining > 0.0) pose = advance_segment(pose, 0, remaining, radius);
  pose.z() = wrap_angle(pose.z());
  return pose;
}

double DubinsPath::curvature_at(double s) const {
  const auto turns = segment_turns(word);
  double edge = 0.0;
  for (int i = 0; i < 3; ++i) {
    edge += segments[i];
    if (s < edge) return turns[i] / radius;
  }
  return turns[2] / radius;
}

std::optional<DubinsPath> dubins_word_path(const Eigen::Vector3d& from, const Eigen::Vector3d& to,
                                           double radius, DubinsWord word) {
  const Normalized n = normalize(from, to, radius);
  auto seg = solve_word(n, word);
  if (!seg) return std::nullopt;
  DubinsPath path;
  path.start = from;
  path.radius = radius;
  path.word = word;
  for (int i = 0; i < 3; ++i) path.segments[i] = (*seg)[i] * radius;
  return path;
}

DubinsPath dubins_shortest(const Eigen::Vector3d& from, const Eigen::Vector3d& to, double radius) {
  std::optional<DubinsPath> best;
  for (DubinsWord w : kDubinsWords) {
    auto p = dubins_word_path(from, to, radius, w);
    if (p && (!best || p->length() < best->length() - 1e-9)) best = p;
  }
  // LSL or RSR always exists for forward-only motion.
  if (!best) throw std::logic_error("dubins: no admissible word");
  return *best;
}

}  // namespace ibbt

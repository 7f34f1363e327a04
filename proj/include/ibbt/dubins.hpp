#pragma once

#include "ibbt/types.hpp"

#include <array>
#include <optional>
#include <string_view>

namespace ibbt {

/// Dubins words, listed in tie-break order.
enum class DubinsWord { LSL, RSR, LSR, RSL, RLR, LRL };

inline constexpr std::array<DubinsWord, 6> kDubinsWords = {
    DubinsWord::LSL, DubinsWord::RSR, DubinsWord::LSR,
    DubinsWord::RSL, DubinsWord::RLR, DubinsWord::LRL};

std::string_view to_string(DubinsWord w);

/// Turning direction of each segment: +1 left, -1 right, 0 straight.
std::array<int, 3> segment_turns(DubinsWord w);

/// Shortest forward-only path between two (x, y, theta) configurations.
struct DubinsPath {
  Eigen::Vector3d start = Eigen::Vector3d::Zero();
  double radius = 1.0;
  DubinsWord word = DubinsWord::LSL;
  std::array<double, 3> segments{};  // arc length of each segment, meters

  double length() const { return segments[0] + segments[1] + segments[2]; }

  /// Configuration reached after travelling arc length s along the path.
  Eigen::Vector3d pose_at(double s) const;

  /// Path curvature at arc length s (right-continuous at segment joints).
  double curvature_at(double s) const;
};

/// Path for one specific word, if that word admits a solution.
std::optional<DubinsPath> dubins_word_path(const Eigen::Vector3d& from, const Eigen::Vector3d& to,
                                           double radius, DubinsWord word);

/// Minimum-length path over all six words; ties within 1e-9 keep the earlier word.
DubinsPath dubins_shortest(const Eigen::Vector3d& from, const Eigen::Vector3d& to, double radius);

/// Exact integration of one constant-curvature segment.
Eigen::Vector3d advance_segment(const Eigen::Vector3d& pose, int turn, double length, double radius);

}  // namespace ibbt

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <random>

namespace ibbt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Nominal state: (x, y, vx, vy) for the double integrator, (x, y, theta) for Dubins.
using StateVec = Vec;

using VertexId = std::int32_t;
using EdgeId = std::int32_t;
using NodeId = std::int32_t;

inline constexpr VertexId kNoVertex = -1;
inline constexpr EdgeId kNoEdge = -1;
inline constexpr NodeId kNoNode = -1;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

using Rng = std::mt19937_64;

/// SplitMix64 finalizer, used to derive independent substream seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return mix_seed(mix_seed(mix_seed(base) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace ibbt

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>

namespace sgt {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Vec2 = Eigen::Vector2d;
// Flat parameter blocks are stored row-major so Map views match the layout.
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Finite saturation value standing in for "unreachable". Costs live in
// [0, kCostMax] and all additions saturate at kCostMax.
inline constexpr double kCostMax = 1e9;

struct NegativeCostError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline double sat_add(double a, double b, double cmax = kCostMax) {
  return std::min(a + b, cmax);
}

inline double clamp_cost(double c, double cmax = kCostMax) {
  return std::clamp(c, 0.0, cmax);
}

inline void check_cost(double c) {
  if (c < 0.0) throw NegativeCostError("cost must be nonnegative");
}

}  // namespace sgt

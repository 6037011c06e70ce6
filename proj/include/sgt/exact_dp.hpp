#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sgt/graph.hpp"
#include "sgt/types.hpp"

namespace sgt {

struct UnreachableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Levels [V_0 .. V_K], K = ceil(log2 n); tables[k](s,s') is the shortest
// cost from s to s' in at most 2^k hops.
struct ValueStack {
  std::vector<Matrix> tables;
  int top() const { return static_cast<int>(tables.size()) - 1; }
};

// Horizon tables [V^B_0 .. V^B_{n-1}]; tables[h](s,g) is the shortest cost
// from s to g in at most h+1 hops.
struct BellmanStack {
  std::vector<Matrix> tables;
};

inline int levels_for(int n) {
  int k = 0;
  while ((1 << k) < n) ++k;
  return k;
}

// (min,+) product: C(i,j) = min_m A(i,m) + B(m,j), saturated at cmax.
// min and the saturation clamp commute, so one clamp per entry suffices.
template <typename Scalar>
MatrixX<Scalar> min_plus_product(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b,
                                 Scalar cmax = static_cast<Scalar>(kCostMax)) {
  const Eigen::Index n = a.rows();
  MatrixX<Scalar> c(n, b.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      c(i, j) = std::min((a.row(i).transpose() + b.col(j)).minCoeff(), cmax);
    }
  }
  return c;
}

ValueStack sgtdp(const Graph& g);
Matrix floyd_warshall(const Graph& g);
BellmanStack bellman_finite_horizon(const Graph& g);

// Recursive argmin-midpoint extraction (ties to the smallest node id).
// Throws UnreachableError when the top table marks (s, g) as unconnected.
SubGoalTree<int> greedy_sgt_trajectory(const ValueStack& stack, int s, int g);

enum class BellmanMode { kSingleV, kPerHorizon };

// Greedy one-step lookahead walk. In per-horizon mode, step k consults
// tables[T-1-k] (T tables serve a trajectory of N = T+1 hops); in single-V
// mode the lone table serves every one of the N = n hops. The final state
// is forced to g either way.
Trajectory greedy_bellman_trajectory(const Graph& g, const std::vector<Matrix>& tables,
                                     int s, int t, BellmanMode mode);

inline Trajectory greedy_bellman_trajectory(const Graph& g, const BellmanStack& stack,
                                            int s, int t, BellmanMode mode) {
  return greedy_bellman_trajectory(g, stack.tables, s, t, mode);
}

}  // namespace sgt

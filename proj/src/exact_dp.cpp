#include "sgt/exact_dp.hpp"

namespace sgt {

ValueStack sgtdp(const Graph& g) {
  ValueStack stack;
  stack.tables.push_back(g.costs);
  int levels = levels_for(g.n);
  for (int k = 1; k <= levels; ++k) {
    Matrix v = min_plus_product(stack.tables.back(), stack.tables.back());
    v.diagonal().setZero();
    stack.tables.push_back(std::move(v));
  }
  return stack;
}

Matrix floyd_warshall(const Graph& g) {
  Matrix v = g.costs;
  const int n = g.n;
  for (int m = 0; m < n; ++m) {
    for (int s = 0; s < n; ++s) {
      for (int t = 0; t < n; ++t) {
        v(s, t) = std::min(v(s, t), sat_add(v(s, m), v(m, t)));
      }
    }
  }
  return v;
}

BellmanStack bellman_finite_horizon(const Graph& g) {
  BellmanStack stack;
  stack.tables.push_back(g.costs);
  for (int h = 1; h < g.n; ++h) {
    const Matrix& prev = stack.tables.back();
    Matrix v = min_plus_product(g.costs, prev);
    v.diagonal().setZero();
    stack.tables.push_back(std::move(v));
  }
  return stack;
}

namespace {

// argmin_m lhs(m) + rhs(m) with smallest-index tie-breaking.
int argmin_sum(const Matrix& a, int row_a, const Matrix& b, int col_b) {
  int best = 0;
  double best_v = sat_add(a(row_a, 0), b(0, col_b));
  for (int m = 1; m < a.cols(); ++m) {
    double v = sat_add(a(row_a, m), b(m, col_b));
    if (v < best_v) {
      best_v = v;
      best = m;
    }
  }
  return best;
}

SubGoalTree<int> extract(const ValueStack& stack, int a, int b, int k) {
  SubGoalTree<int> node;
  node.start = a;
  node.goal = b;
  node.depth = k;
  if (k > 0) {
    const Matrix& v = stack.tables[k - 1];
    int m = argmin_sum(v, a, v, b);
    node.midpoint = m;
    node.left = std::make_unique<SubGoalTree<int>>(extract(stack, a, m, k - 1));
    node.right = std::make_unique<SubGoalTree<int>>(extract(stack, m, b, k - 1));
  }
  return node;
}

}  // namespace

SubGoalTree<int> greedy_sgt_trajectory(const ValueStack& stack, int s, int g) {
  if (stack.tables.empty()) throw std::invalid_argument("empty value stack");
  if (stack.tables.back()(s, g) >= kCostMax)
    throw UnreachableError("no path between the requested nodes");
  return extract(stack, s, g, stack.top());
}

Trajectory greedy_bellman_trajectory(const Graph& g, const std::vector<Matrix>& tables,
                                     int s, int t, BellmanMode mode) {
  if (tables.empty()) throw std::invalid_argument("no bellman tables supplied");
  const int hops = mode == BellmanMode::kPerHorizon
                       ? static_cast<int>(tables.size()) + 1
                       : g.n;
  std::vector<int> states;
  states.reserve(hops + 1);
  states.push_back(s);
  int cur = s;
  for (int k = 0; k + 1 < hops; ++k) {
    const Matrix& v = mode == BellmanMode::kPerHorizon
                          ? tables[tables.size() - 1 - k]
                          : tables.front();
    cur = argmin_sum(g.costs, cur, v, t);
    states.push_back(cur);
  }
  states.push_back(t);
  return make_trajectory(g, std::move(states));
}

}  // namespace sgt

#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgt/rng.hpp"
#include "sgt/types.hpp"

namespace sgt {

struct SelfEdgeNonzeroError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct MalformedTreeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense directed graph. Missing edges hold kCostMax, the diagonal is 0.
struct Graph {
  int n = 0;
  Matrix costs;  // n x n, entries in [0, kCostMax]

  double cost(int i, int j) const { return costs(i, j); }
};

struct Edge {
  int from = 0;
  int to = 0;
  double cost = 0.0;
};

Graph make_graph(int n, const std::vector<Edge>& edges);

// Every ordered pair (i, j), i != j, gets an edge with probability `density`;
// costs are uniform integers in [cost_lo, cost_hi].
Graph random_graph(int n, double density, int cost_lo, int cost_hi, Rng& rng);

Graph load_graph(const std::string& path);
void save_graph(const Graph& g, const std::string& path);

struct Trajectory {
  std::vector<int> states;
  std::vector<double> segment_costs;

  double total_cost() const {
    double c = 0.0;
    for (double s : segment_costs) c = sat_add(c, s);
    return c;
  }
};

double trajectory_cost(const Graph& g, const std::vector<int>& states);
Trajectory make_trajectory(const Graph& g, std::vector<int> states);

// Full binary tree of uniform depth; a leaf is a (start, goal) segment.
template <typename State>
struct SubGoalTree {
  State start{};
  State goal{};
  State midpoint{};  // meaningful iff depth > 0
  int depth = 0;
  std::unique_ptr<SubGoalTree> left;
  std::unique_ptr<SubGoalTree> right;
};

// In-order state sequence of length 2^depth + 1.
template <typename State>
void flatten_into(const SubGoalTree<State>& t, std::vector<State>& out) {
  if (t.depth == 0) {
    if (t.left || t.right) throw MalformedTreeError("leaf with children");
    out.push_back(t.goal);
    return;
  }
  if (!t.left || !t.right) throw MalformedTreeError("internal node missing children");
  if (t.left->depth != t.depth - 1 || t.right->depth != t.depth - 1)
    throw MalformedTreeError("inconsistent child depth");
  flatten_into(*t.left, out);
  flatten_into(*t.right, out);
}

template <typename State>
std::vector<State> flatten(const SubGoalTree<State>& t) {
  std::vector<State> out;
  out.push_back(t.start);
  flatten_into(t, out);
  return out;
}

// Rebuilds the unique uniform-depth tree whose flattening is `states`
// (length must be 2^depth + 1); inverse of flatten.
template <typename State>
std::unique_ptr<SubGoalTree<State>> build_tree(const std::vector<State>& states,
                                               int lo, int hi, int depth) {
  auto node = std::make_unique<SubGoalTree<State>>();
  node->start = states[lo];
  node->goal = states[hi];
  node->depth = depth;
  if (depth > 0) {
    int mid = (lo + hi) / 2;
    node->midpoint = states[mid];
    node->left = build_tree(states, lo, mid, depth - 1);
    node->right = build_tree(states, mid, hi, depth - 1);
  }
  return node;
}

template <typename State>
std::unique_ptr<SubGoalTree<State>> build_tree(const std::vector<State>& states, int depth) {
  if (static_cast<int>(states.size()) != (1 << depth) + 1)
    throw MalformedTreeError("state count is not 2^depth + 1");
  return build_tree(states, 0, static_cast<int>(states.size()) - 1, depth);
}

}  // namespace sgt

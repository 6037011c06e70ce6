#pragma once

#include <vector>

#include "sgt/graph.hpp"

// Exhaustive shortest-path oracle: DFS over simple paths with cost pruning.
// With nonnegative costs, optimal bounded-hop walks never revisit a node
// except through free self-loops, which only waste hops, so simple paths of
// at most max_hops edges are exhaustive.
inline double oracle_shortest(const sgt::Graph& g, int s, int t, int max_hops,
                              std::vector<char>& visited, double cost_so_far,
                              double best) {
  if (cost_so_far >= best) return best;
  if (s == t) return cost_so_far;
  if (max_hops == 0) return best;
  visited[s] = 1;
  for (int v = 0; v < g.n; ++v) {
    if (visited[v] || g.costs(s, v) >= sgt::kCostMax) continue;
    double c = cost_so_far + g.costs(s, v);
    best = oracle_shortest(g, v, t, max_hops - 1, visited, c, best);
  }
  visited[s] = 0;
  return best;
}

inline double oracle_shortest(const sgt::Graph& g, int s, int t, int max_hops) {
  std::vector<char> visited(g.n, 0);
  double best = oracle_shortest(g, s, t, max_hops, visited, 0.0, sgt::kCostMax);
  return std::min(best, sgt::kCostMax);
}

inline sgt::Matrix oracle_all_pairs(const sgt::Graph& g, int max_hops) {
  sgt::Matrix v(g.n, g.n);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) v(i, j) = oracle_shortest(g, i, j, max_hops);
  return v;
}

inline sgt::Graph make_g4() {
  return sgt::make_graph(4, {{0, 1, 1.0},
                             {1, 2, 1.0},
                             {2, 3, 1.0},
                             {0, 2, 5.0},
                             {1, 3, 5.0},
                             {0, 3, 10.0}});
}

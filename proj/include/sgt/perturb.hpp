#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>

#include "sgt/exact_dp.hpp"
#include "sgt/graph.hpp"

namespace sgt {

struct BoundViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class NoiseKind { kUniformPmEps, kAdversarial };

struct NoiseSpec {
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  NoiseKind distribution = NoiseKind::kUniformPmEps;
};

struct BoundReport {
  int n = 0;
  double epsilon = 0.0;
  double observed_value_error = 0.0;
  double value_bound = 0.0;
  double observed_traj_excess = 0.0;
  double traj_bound = 0.0;
  int violations = 0;
};

// Exact level update plus fresh per-entry noise bounded by epsilon; entries
// clamped to [0, C_MAX] and diagonal kept at 0 (clamping only shrinks the
// deviation from the exact table, so the eps-approximate condition holds).
ValueStack perturbed_sgtdp(const Graph& g, const NoiseSpec& spec);

// Per-horizon noisy Bellman tables [V^B_0 .. V^B_{n-2}], same noise model.
std::vector<Matrix> perturbed_bellman(const Graph& g, const NoiseSpec& spec);

// Extracts greedy SGT trajectories from the perturbed stack for `trials`
// random pairs and asserts true cost <= V*(s,g) + 4 N log2(N) eps.
BoundReport check_sgt_trajectory_bound(const Graph& g, const NoiseSpec& spec, int trials);

// Greedy per-horizon walks on noisy Bellman tables against the quadratic
// bound V*(s,g) + (N^2 - N) eps.
BoundReport check_bellman_trajectory_bound(const Graph& g, const NoiseSpec& spec, int trials);

// Chain s_0 -> ... -> s_{n-1} -> g of eps-cost edges (node n is g) plus a
// single adversarial table that keeps a greedy one-step walk parked at s_0:
// the walk pays C_MAX on the forced final hop while the optimal cost is
// n*eps. The table deviates from V* by exactly n*eps at one entry.
struct AdversarialSingle {
  Graph graph;
  Matrix table;
};
AdversarialSingle adversarial_single_v(int n, double epsilon);

// Multi-table construction: from each s_k an edge of cost (n-k-1)*eps to
// both s_{k+1} and s_{n-1}; s_{n-1} -> g is free. Greedy per-horizon on the
// returned tables walks the whole chain for cost (n^2-n)*eps/2 while the
// optimal is (n-1)*eps. Each table stays within its allowed error band.
struct AdversarialMulti {
  Graph graph;
  BellmanStack stack;
  double greedy_cost = 0.0;
  double optimal_cost = 0.0;
};
AdversarialMulti adversarial_multi_v(int n, double epsilon, double delta);

}  // namespace sgt

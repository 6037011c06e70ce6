#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sgt/policy.hpp"
#include "sgt/rng.hpp"
#include "sgt/types.hpp"
#include "sgt/world2d.hpp"

namespace sgt {

struct IndexOutOfRange : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct LengthMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptyBatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NonFiniteGradient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat-array indices of segment i at depth d of a depth-D tree over states
// s_0 .. s_{2^D}: the segment spans [start, goal] and its predicted sub-goal
// sits at mid.
struct TreeIndices {
  int start = 0;
  int mid = 0;
  int goal = 0;
};

// Requires 1 <= d <= D and 1 <= i <= 2^(D-d); throws IndexOutOfRange.
TreeIndices tree_indices(int i, int d, int D);

// Sum of the leaf segment costs covered by segment (i, d), i.e. leaves
// (i-1)*2^d .. i*2^d - 1 of a full tree whose leaf costs are given.
double segment_sum(const std::vector<double>& costs, int i, int d);

// Per-leaf segment costs of a trajectory (length 2^depth + 1 states gives
// 2^depth entries).
std::vector<double> leaf_costs(const World2D& w, const std::vector<Vec2>& traj);

bool trajectory_success(const World2D& w, const std::vector<Vec2>& traj);

enum class PredictMode {
  kMean,            // every depth takes the Gaussian mean
  kSample,          // every depth samples
  kSampleRootOnly,  // the root depth samples, lower depths take means
};

// Recursive sub-goal prediction: policies[d-1] acts at depth d, the root at
// depth `depth`. Returns the flattened trajectory of 2^depth + 1 states
// (endpoints included). Sampling modes consume rng.
std::vector<Vec2> predict_subgoals(const std::vector<SubgoalPolicy>& policies, const Vec2& s,
                                   const Vec2& g, int depth, PredictMode mode, Rng* rng = nullptr);

// Trajectory log-likelihood under the depth-indexed policies, computed two
// ways that must agree: by the segment recursion, and by the flat
// sum-over-(i, d) regrouping.
double log_likelihood_recursive(const std::vector<SubgoalPolicy>& policies,
                                const std::vector<Vec2>& traj, int depth);
double log_likelihood_flat(const std::vector<SubgoalPolicy>& policies,
                           const std::vector<Vec2>& traj, int depth);

// One on-policy episode collected while training depth d: the trajectory has
// depth d, only the root decision was sampled, and baseline is the mean
// total cost over the repeats that share this (s, g) pair.
struct Episode {
  std::vector<Vec2> traj;
  std::vector<double> costs;  // per-leaf segment costs
  double baseline = 0.0;
};

// Score-function gradient estimate for the depth-d policy from episodes
// collected at tree depth d: the Monte Carlo mean over episodes of
// (total cost - baseline) * grad log pi_d(root mid | s, g).
Vector pg_gradient(const std::vector<SubgoalPolicy>& policies, const std::vector<Episode>& batch,
                   int d, bool use_baseline);

// One sampled decision prepared for surrogate updates. The advantage is
// reward-style: baseline minus cost, so positive means better than baseline.
struct Decision {
  Vec2 s, g, x;
  double logp_old = 0.0;
  double advantage = 0.0;
};

struct PpoConfig {
  double clip_eps = 0.2;
  double entropy_coeff = 1.0;
  double lr = 0.005;
  double grad_clip = 0.0;  // L2 norm cap; 0 disables
};

struct AdamState {
  Vector m, v;
  int t = 0;
};

// Clipped-ratio surrogate loss (negated PPO objective plus entropy bonus)
// over the batch at the policy's current parameters.
double ppo_surrogate_loss(const SubgoalPolicy& pi, const std::vector<Decision>& batch,
                          const PpoConfig& cfg);

// One Adam step on the surrogate. A non-finite gradient or update aborts
// without touching the parameters, halves the learning rate, and retries
// once; a second failure throws NonFiniteGradient. Returns the surrogate
// loss before the step.
double ppo_surrogate_step(SubgoalPolicy& pi, const std::vector<Decision>& batch,
                          const PpoConfig& cfg, AdamState& opt);

struct TrainConfig {
  int depth = 1;             // number of policy levels (2^depth - 1 sub-goals)
  int pairs_per_cycle = 30;
  int repeats = 10;          // sampled trajectories per pair; also the baseline pool
  int ppo_steps = 5;         // surrogate steps per collected batch
  int max_cycles = 200;      // per depth
  int eval_pairs = 30;       // fixed mean-mode evaluation set
  int patience = 20;         // cycles without 1% improvement before advancing
  double min_improvement = 0.01;
  PpoConfig ppo;
};

struct CurvePoint {
  int cycle = 0;  // global cycle counter across depths
  int depth = 0;  // depth being trained
  double mean_cost = 0.0;
  double success_rate = 0.0;
};

struct TrainResult {
  std::vector<SubgoalPolicy> policies;
  std::vector<CurvePoint> curve;
};

// Depth-sequential policy-gradient training: trains pi_1 to convergence,
// then pi_2 initialized from pi_1, and so on; lower depths stay frozen and
// supply mean predictions while the current depth samples.
TrainResult train_sgt_pg(const World2D& w, const TrainConfig& cfg, std::uint64_t seed);

// Sequential baseline: a single policy predicts the next sub-goal from
// (current, goal) and is applied n_subgoals times; trained with the same
// surrogate and pair-mean baseline, plus an L2 gradient clip of 10.
TrainResult train_seq_sg(const World2D& w, int n_subgoals, TrainConfig cfg, std::uint64_t seed);

// Mean-mode rollout of the sequential policy: [s, x_1 .. x_n, g].
std::vector<Vec2> seq_rollout(const SubgoalPolicy& pi, const Vec2& s, const Vec2& g,
                              int n_subgoals);

}  // namespace sgt

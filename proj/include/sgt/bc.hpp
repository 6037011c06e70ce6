#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgt/policy.hpp"
#include "sgt/rng.hpp"
#include "sgt/sgt_pg.hpp"
#include "sgt/types.hpp"
#include "sgt/world2d.hpp"

namespace sgt {

struct NoPathError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Expert demonstrations: collision-free state sequences at the world's step
// scale, endpoints in free space.
struct ExpertDataset {
  std::vector<std::vector<Vec2>> trajectories;
};

// Shortest collision-free path from s to g: A* over a 100x100 8-connected
// lattice, pulled taut by greedy shortcutting, resampled at the world's
// step size. Throws NoPathError when the lattice has no route.
std::vector<Vec2> expert_path(const World2D& w, const Vec2& s, const Vec2& g);

ExpertDataset generate_expert_dataset(const World2D& w, int count, std::uint64_t seed);

// JSON-lines cache: one {"states": [[x, y], ...]} object per line.
void save_expert_dataset(const ExpertDataset& data, const std::string& path);
ExpertDataset load_expert_dataset(const std::string& path);

struct BcConfig {
  int steps = 4000;
  int batch_size = 64;
  double lr = 0.005;
};

struct BcTrainResult {
  SubgoalPolicy model;
  std::vector<double> loss_curve;  // per-step batch mean negative log-likelihood
};

// Maximum-likelihood midpoint model: each step samples trajectories and index
// pairs a < b and fits the Gaussian to the state at index floor((a+b)/2)
// conditioned on (s_a, s_b). One parameter vector serves every tree depth.
BcTrainResult bc_train_sgt(const ExpertDataset& data, const BcConfig& cfg, std::uint64_t seed);

// Next-state baseline: fits the same Gaussian structure to s_{t+1}
// conditioned on (s_t, final goal).
BcTrainResult bc_train_sequential(const ExpertDataset& data, const BcConfig& cfg,
                                  std::uint64_t seed);

// Recursive midpoint prediction: [s] + tree midpoints + [g], 2^K + 1 states
// from exactly 2^K - 1 model calls (counted into model_calls when given).
std::vector<Vec2> bc_predict_sgt(const SubgoalPolicy& model, const Vec2& s, const Vec2& g, int K,
                                 PredictMode mode, Rng* rng = nullptr, int* model_calls = nullptr);

// Iterative next-state rollout until within goal_threshold of g or step_cap
// calls; one model call per emitted state.
std::vector<Vec2> bc_rollout_sequential(const SubgoalPolicy& model, const Vec2& s, const Vec2& g,
                                        double goal_threshold, int step_cap, PredictMode mode,
                                        Rng* rng = nullptr, int* model_calls = nullptr);

}  // namespace sgt

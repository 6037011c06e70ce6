#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "sgt/graph.hpp"
#include "sgt/knn.hpp"
#include "sgt/rng.hpp"
#include "sgt/types.hpp"
#include "sgt/world2d.hpp"

namespace sgt {

// Regular lattice of collision-free states used as the candidate set for
// subgoal minimization. Points are stored in ascending (x, y) lexicographic
// order so that argmin tie-breaking is reproducible.
struct SearchGrid {
  std::vector<Vec2> points;
};

SearchGrid make_search_grid(const World2D& world, int resolution = 50);

// k-nearest-neighbor value model over state pairs (s, g) in R^2 x R^2.
// Besides single-pair evaluation it answers whole-grid "profiles" — the
// predictions at (s, m) or (m, g) for every grid point m — through a sliced
// search that prefilters stored pairs by the fixed endpoint and then walks
// ring buckets around each query. Profiles are exact: they return the same
// values as brute-force k-NN with (squared distance, index) tie-breaking.
class PairValueModel {
 public:
  PairValueModel() = default;
  // points is m x 4 (rows are [s_x, s_y, g_x, g_y]).
  PairValueModel(Matrix points, Vector targets, int k);

  double eval(const Vec2& s, const Vec2& g) const;
  // out[j] = prediction at (s, grid[j]).
  void profile_from(const Vec2& s, const std::vector<Vec2>& grid, Vector& out) const;
  // out[j] = prediction at (grid[j], g).
  void profile_to(const Vec2& g, const std::vector<Vec2>& grid, Vector& out) const;

  const Matrix& points() const { return points_; }
  const Vector& targets() const { return targets_; }
  int k() const { return k_; }
  int size() const { return static_cast<int>(points_.rows()); }

 private:
  struct SideIndex;  // bucket grid over one 2-d slice of the pair features

  void profile(const Vec2& fixed, bool fixed_is_first, const std::vector<Vec2>& grid,
               Vector& out) const;

  Matrix points_;
  Vector targets_;
  int k_ = 1;
  KdTree tree_;
  std::shared_ptr<const SideIndex> first_index_;   // buckets over s-parts
  std::shared_ptr<const SideIndex> second_index_;  // buckets over g-parts
  mutable std::vector<std::pair<double, int>> scratch_;
};

// Stack of fitted value models, one per subgoal-tree level; models[k]
// approximates the optimal cost of 2^k environment steps.
struct ValueStackFitted {
  std::vector<PairValueModel> models;
  double c_max = 0.0;
};

// Fits a value-model stack from transition data by approximate dynamic
// programming on subgoal trees: level 0 regresses one-step costs (real
// transitions, plus random pairs pinned to c_max and self pairs pinned to
// zero, one of each per transition), and level k regresses
// min_m V^{k-1}(s, m) + V^{k-1}(m, g) over the search grid at freshly drawn
// state pairs.
ValueStackFitted fitted_sgtdp(const std::vector<TransitionTuple>& data, double c_max, int levels,
                              const SearchGrid& grid, std::uint64_t seed, int k_neighbors = 5);

// Recursively extracts the subgoal tree for (start, goal): the level-k
// midpoint is the grid argmin of V^{k-1}(s, m) + V^{k-1}(m, g), ties going
// to the lexicographically smallest grid point.
SubGoalTree<Vec2> extract_sgt_plan(const ValueStackFitted& stack, const Vec2& start,
                                   const Vec2& goal, const SearchGrid& grid);

// Approximate all-pairs value iteration in the style of Floyd–Warshall: one
// model is refit every sweep on relaxed targets
// min{V(s,g), V(s,m)+V(m,g)} at random pairs plus zeroed self pairs.
// spreads[i] records max-min of the model over `probe` after sweep i+1
// (iterations == 0 returns the initial one-step fit).
struct ApproxFwResult {
  PairValueModel model;
  std::vector<double> spreads;
};

ApproxFwResult approx_fw(const std::vector<TransitionTuple>& data, double c_max, int iterations,
                         std::uint64_t seed, const std::vector<std::pair<Vec2, Vec2>>& probe = {},
                         int k_neighbors = 5);

// Tabular analogue of approx_fw on an explicit graph: values live in a dense
// matrix keyed by exact node pairs, relaxations use uniformly random
// midpoints. With function approximation removed the same update converges
// to the true all-pairs optimum.
Matrix approx_fw_table(const Graph& g, int sweeps, std::uint64_t seed);

// Goal-conditioned fitted Q-iteration: one k-NN regressor per action over
// (s, g) features. Backups draw a random goal per transition and bootstrap
// min_u Q(s', u, g), zeroed once s' is within goal_threshold of g. Passing
// fixed_goal trains the classic single-goal variant instead: every backup
// uses that goal.
struct QModel {
  std::vector<KnnRegressor> per_action;  // indexed by action id
  double goal_threshold = 0.0;

  double eval(const Vec2& s, int action, const Vec2& g) const;
  // Smallest-q action; ties go to the smaller action id.
  int greedy_action(const Vec2& s, const Vec2& g) const;
};

QModel fqi_universal(const std::vector<TransitionTuple>& data, int iterations, std::uint64_t seed,
                     double goal_threshold = 0.15, int k_neighbors = 5,
                     std::optional<Vec2> fixed_goal = std::nullopt);

// 5-NN inverse model: predicts the action that produced transition s -> s'.
KnnClassifier fit_inverse_model(const std::vector<TransitionTuple>& data, int k_neighbors = 5);

// Closed-loop subgoal tracking. The controller picks an action toward the
// current subgoal; a subgoal is reached when the state comes within
// goal_threshold, after which tracking advances to the next one. The rollout
// stops when all subgoals are consumed or after max_steps.
struct RolloutResult {
  double final_distance = 0.0;  // to the last plan entry
  bool collided = false;
  int steps = 0;
};

using Controller = std::function<int(const Vec2& state, const Vec2& subgoal)>;

RolloutResult track_subgoals(const World2D& world, const std::vector<Vec2>& plan,
                             const Controller& controller, int max_steps = 400);

// The returned controllers reference q / im; keep them alive while tracking.
Controller make_fqi_controller(const QModel& q);
Controller make_im_controller(const KnnClassifier& im);

}  // namespace sgt

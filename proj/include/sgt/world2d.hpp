#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sgt/rng.hpp"
#include "sgt/types.hpp"

namespace sgt {

struct InvalidActionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Rect {
  double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;

  bool contains_interior(const Vec2& p) const {
    return p.x() > xmin && p.x() < xmax && p.y() > ymin && p.y() < ymax;
  }
};

// Unit-square point robot world. Obstacle interiors are solid; faces are
// traversable so the robot can slide along walls and the clamped boundary.
struct World2D {
  std::vector<Rect> obstacles;
  double step_size = 0.025;
  double free_cost = 0.025;
  double collision_cost = 10.0;
  double goal_threshold = 0.15;
  double alpha_free = 1.0;
  double alpha_collision = 100.0;
  double substep = 0.005;

  bool inside_obstacle(const Vec2& p) const {
    for (const Rect& r : obstacles)
      if (r.contains_interior(p)) return true;
    return false;
  }
};

struct TransitionTuple {
  Vec2 s;
  int u = 0;
  double c = 0.0;
  Vec2 s_next;
};

constexpr int kNumActions = 8;

// Eight compass directions, N first, clockwise; diagonal displacement is
// normalized so every step has length exactly step_size.
Vec2 action_direction(int u);

std::pair<Vec2, double> step(const World2D& w, const Vec2& s, int u);

// True iff no sub-step sample of the straight segment lies strictly inside
// an obstacle. This sampled walk is the single collision notion used by
// step, segment costing, and success checks.
bool segment_free(const World2D& w, const Vec2& a, const Vec2& b);

// With-reset segment evaluator: a free segment costs alpha_free times its
// exact Euclidean length; a blocked one costs the free run up to the last
// free sample s_stop plus alpha_collision times the unreached remainder.
double segment_cost(const World2D& w, const Vec2& s, const Vec2& s_next);

Vec2 sample_free_state(const World2D& w, Rng& rng);
std::vector<TransitionTuple> sample_dataset(const World2D& w, int m, std::uint64_t seed);
std::pair<Vec2, Vec2> sample_start_goal(const World2D& w, std::uint64_t seed);
std::pair<Vec2, Vec2> sample_start_goal(const World2D& w, Rng& rng);

std::map<std::string, World2D> builtin_worlds();

// Resolves a builtin name, else loads a world JSON file.
World2D resolve_world(const std::string& name_or_path);

World2D load_world(const std::string& path);
void save_world(const World2D& w, const std::string& path);

std::vector<TransitionTuple> load_dataset(const std::string& path);
void save_dataset(const std::vector<TransitionTuple>& data, const std::string& path);

}  // namespace sgt

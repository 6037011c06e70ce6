#include "sgt/world2d.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace sgt {

namespace {

constexpr double kDiag = 0.70710678118654752440;

Vec2 clamp_unit(const Vec2& p) {
  return Vec2(std::clamp(p.x(), 0.0, 1.0), std::clamp(p.y(), 0.0, 1.0));
}

// Index of the first sub-step sample strictly inside an obstacle, or -1.
// Samples are i/num along the segment, i = 0..num.
int first_blocked_sample(const World2D& w, const Vec2& a, const Vec2& b, int& num_out) {
  double len = (b - a).norm();
  int num = std::max(1, static_cast<int>(std::ceil(len / w.substep)));
  num_out = num;
  if (w.obstacles.empty()) return -1;
  for (int i = 0; i <= num; ++i) {
    Vec2 p = a + (static_cast<double>(i) / num) * (b - a);
    if (w.inside_obstacle(p)) return i;
  }
  return -1;
}

}  // namespace

Vec2 action_direction(int u) {
  static const double dirs[8][2] = {{0, 1},      {kDiag, kDiag},   {1, 0},  {kDiag, -kDiag},
                                    {0, -1},     {-kDiag, -kDiag}, {-1, 0}, {-kDiag, kDiag}};
  if (u < 0 || u > 7) throw InvalidActionError("action id must be in 0..7");
  return Vec2(dirs[u][0], dirs[u][1]);
}

std::pair<Vec2, double> step(const World2D& w, const Vec2& s, int u) {
  Vec2 target = clamp_unit(s + w.step_size * action_direction(u));
  int num = 0;
  if (first_blocked_sample(w, s, target, num) >= 0) {
    return {s, w.collision_cost};
  }
  return {target, w.free_cost};
}

bool segment_free(const World2D& w, const Vec2& a, const Vec2& b) {
  int num = 0;
  return first_blocked_sample(w, a, b, num) < 0;
}

double segment_cost(const World2D& w, const Vec2& s, const Vec2& s_next) {
  int num = 0;
  int hit = first_blocked_sample(w, s, s_next, num);
  double len = (s_next - s).norm();
  if (hit < 0) return w.alpha_free * len;
  Vec2 stop = s + (static_cast<double>(std::max(hit - 1, 0)) / num) * (s_next - s);
  return w.alpha_free * (stop - s).norm() + w.alpha_collision * (s_next - stop).norm();
}

Vec2 sample_free_state(const World2D& w, Rng& rng) {
  for (;;) {
    Vec2 p(rng.uniform(), rng.uniform());
    if (!w.inside_obstacle(p)) return p;
  }
}

std::vector<TransitionTuple> sample_dataset(const World2D& w, int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("dataset size must be >= 1");
  Rng rng = Rng(seed).derive(0xda7a);
  std::vector<TransitionTuple> out;
  out.reserve(m);
  for (int i = 0; i < m; ++i) {
    TransitionTuple t;
    t.s = sample_free_state(w, rng);
    t.u = rng.uniform_index(8);
    auto [sn, c] = step(w, t.s, t.u);
    t.s_next = sn;
    t.c = c;
    out.push_back(t);
  }
  return out;
}

std::pair<Vec2, Vec2> sample_start_goal(const World2D& w, Rng& rng) {
  Vec2 s = sample_free_state(w, rng);
  Vec2 g = sample_free_state(w, rng);
  return {s, g};
}

std::pair<Vec2, Vec2> sample_start_goal(const World2D& w, std::uint64_t seed) {
  Rng rng = Rng(seed).derive(0x5a9a);
  return sample_start_goal(w, rng);
}

std::map<std::string, World2D> builtin_worlds() {
  std::map<std::string, World2D> worlds;

  worlds["empty"] = World2D{};

  // One central wall with a passage above it.
  World2D wall;
  wall.obstacles = {{0.48, 0.0, 0.52, 0.7}};
  worlds["wall2d"] = wall;

  // S-shaped corridor: two slabs attached to opposite sides force a
  // double-bend detour; the longest shortest paths exceed 2.5 units.
  World2D corridor;
  corridor.obstacles = {{0.0, 0.26, 0.75, 0.42}, {0.25, 0.58, 1.0, 0.74}};
  worlds["corridor_simple"] = corridor;

  // Rooms with offset gaps; the left wall has two gaps, so left-to-right
  // routes through different gaps are homotopy-distinct.
  World2D rooms;
  rooms.obstacles = {{0.30, 0.0, 0.38, 0.30},  {0.30, 0.42, 0.38, 0.62},
                     {0.30, 0.74, 0.38, 1.0},  {0.62, 0.0, 0.70, 0.45},
                     {0.62, 0.60, 0.70, 1.0}};
  worlds["rooms_hard"] = rooms;

  return worlds;
}

World2D resolve_world(const std::string& name_or_path) {
  auto worlds = builtin_worlds();
  auto it = worlds.find(name_or_path);
  if (it != worlds.end()) return it->second;
  return load_world(name_or_path);
}

World2D load_world(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open world file: " + path);
  nlohmann::json j;
  in >> j;
  World2D w;
  for (const auto& r : j.at("obstacles")) {
    w.obstacles.push_back({r.at(0).get<double>(), r.at(1).get<double>(),
                           r.at(2).get<double>(), r.at(3).get<double>()});
  }
  return w;
}

void save_world(const World2D& w, const std::string& path) {
  nlohmann::json obs = nlohmann::json::array();
  for (const Rect& r : w.obstacles) obs.push_back({r.xmin, r.ymin, r.xmax, r.ymax});
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write world file: " + path);
  f << nlohmann::json{{"obstacles", obs}}.dump(2) << "\n";
}

std::vector<TransitionTuple> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  std::vector<TransitionTuple> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    TransitionTuple t;
    t.s = Vec2(j.at("s").at(0).get<double>(), j.at("s").at(1).get<double>());
    t.u = j.at("u").get<int>();
    t.c = j.at("c").get<double>();
    t.s_next = Vec2(j.at("sn").at(0).get<double>(), j.at("sn").at(1).get<double>());
    out.push_back(t);
  }
  return out;
}

void save_dataset(const std::vector<TransitionTuple>& data, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write dataset file: " + path);
  for (const TransitionTuple& t : data) {
    nlohmann::json j = {{"s", {t.s.x(), t.s.y()}},
                        {"u", t.u},
                        {"c", t.c},
                        {"sn", {t.s_next.x(), t.s_next.y()}}};
    f << j.dump() << "\n";
  }
}

}  // namespace sgt

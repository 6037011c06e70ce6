#include "sgt/bc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgt/knn.hpp"

namespace sgt {
namespace {

constexpr int kLatticeRes = 100;

inline Vec2 lattice_point(int ix, int iy) {
  const double h = 1.0 / (kLatticeRes - 1);
  return {ix * h, iy * h};
}

// Exact test: does the segment a-b touch the open interior of any obstacle?
// The world's sampled segment check can step over thin corner slivers, which
// is fine for its cost semantics but would let the expert thread states
// through walls; expert chords therefore use the exact geometric test, and
// geometric freedom implies sampled freedom.
bool chord_free(const World2D& w, const Vec2& a, const Vec2& b) {
  for (const Rect& r : w.obstacles) {
    // Open interval of segment parameters inside the open slab lo < x < hi.
    const auto slab = [](double p, double q, double lo, double hi, double& t0, double& t1) {
      const double d = q - p;
      if (d == 0.0) {
        if (p <= lo || p >= hi) t1 = -1.0;  // empty
        return;
      }
      double u0 = (lo - p) / d, u1 = (hi - p) / d;
      if (u0 > u1) std::swap(u0, u1);
      t0 = std::max(t0, u0);
      t1 = std::min(t1, u1);
    };
    double t0 = 0.0, t1 = 1.0;
    slab(a.x(), b.x(), r.xmin, r.xmax, t0, t1);
    slab(a.y(), b.y(), r.ymin, r.ymax, t0, t1);
    if (t0 < t1) return false;
  }
  return true;
}

// Lattice nodes reachable from a continuum point by a straight free chord,
// found by an expanding square ring search around the rounded cell.
std::vector<int> link_candidates(const World2D& w, const Vec2& p) {
  const int cx = std::clamp(static_cast<int>(std::lround(p.x() * (kLatticeRes - 1))), 0,
                            kLatticeRes - 1);
  const int cy = std::clamp(static_cast<int>(std::lround(p.y() * (kLatticeRes - 1))), 0,
                            kLatticeRes - 1);
  std::vector<int> links;
  for (int r = 0; r < kLatticeRes; ++r) {
    for (int ix = std::max(cx - r, 0); ix <= std::min(cx + r, kLatticeRes - 1); ++ix) {
      for (int iy = std::max(cy - r, 0); iy <= std::min(cy + r, kLatticeRes - 1); ++iy) {
        if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != r) continue;
        const Vec2 np = lattice_point(ix, iy);
        if (w.inside_obstacle(np) || !chord_free(w, p, np)) continue;
        links.push_back(ix * kLatticeRes + iy);
      }
    }
    if (!links.empty() && r > 1) break;  // one ring beyond the first hit
  }
  if (links.empty()) throw NoPathError("expert_path: endpoint sees no lattice node");
  return links;
}

// A* over the 8-connected lattice plus the two continuum endpoints, with
// Euclidean edge costs and exact chord validation.
std::vector<Vec2> astar_lattice(const World2D& w, const Vec2& s, const Vec2& g) {
  const int n = kLatticeRes * kLatticeRes;
  const int goal_id = n;
  std::vector<double> dist(n + 1, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n + 1, -1);
  std::vector<char> goal_link(n, 0);
  for (const int v : link_candidates(w, g)) goal_link[v] = 1;
  using Entry = std::pair<double, int>;  // (f, node)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  for (const int v : link_candidates(w, s)) {
    const Vec2 vp = lattice_point(v / kLatticeRes, v % kLatticeRes);
    const double d = (vp - s).norm();
    if (d < dist[v]) {
      dist[v] = d;
      parent[v] = -2;  // reached straight from s
      open.emplace(d + (vp - g).norm(), v);
    }
  }
  while (!open.empty()) {
    const auto [f, u] = open.top();
    open.pop();
    if (u == goal_id) break;
    const int ux = u / kLatticeRes, uy = u % kLatticeRes;
    const Vec2 up = lattice_point(ux, uy);
    if (f > dist[u] + (up - g).norm() + 1e-12) continue;  // stale entry
    if (goal_link[u]) {
      const double nd = dist[u] + (g - up).norm();
      if (nd < dist[goal_id]) {
        dist[goal_id] = nd;
        parent[goal_id] = u;
        open.emplace(nd, goal_id);
      }
    }
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        if (dx == 0 && dy == 0) continue;
        const int vx = ux + dx, vy = uy + dy;
        if (vx < 0 || vx >= kLatticeRes || vy < 0 || vy >= kLatticeRes) continue;
        const Vec2 vp = lattice_point(vx, vy);
        if (w.inside_obstacle(vp) || !chord_free(w, up, vp)) continue;
        const int v = vx * kLatticeRes + vy;
        const double nd = dist[u] + (vp - up).norm();
        if (nd < dist[v]) {
          dist[v] = nd;
          parent[v] = u;
          open.emplace(nd + (vp - g).norm(), v);
        }
      }
    }
  }
  if (!std::isfinite(dist[goal_id])) throw NoPathError("expert_path: endpoints not connected");
  std::vector<Vec2> path{g};
  for (int v = parent[goal_id]; v != -2; v = parent[v])
    path.push_back(lattice_point(v / kLatticeRes, v % kLatticeRes));
  path.push_back(s);
  std::reverse(path.begin(), path.end());
  return path;
}

// Greedy string pulling: from each anchor, jump to the farthest vertex the
// straight chord can reach. Straight-line-optimal wherever the chord is
// free, taut around corners otherwise. Consecutive input edges are already
// chord-validated, so the fallback step never crosses an obstacle.
std::vector<Vec2> shortcut(const World2D& w, const std::vector<Vec2>& pts) {
  std::vector<Vec2> taut{pts.front()};
  std::size_t i = 0;
  while (i + 1 < pts.size()) {
    std::size_t j = pts.size() - 1;
    for (; j > i + 1; --j) {
      if (chord_free(w, pts[i], pts[j])) break;
    }
    taut.push_back(pts[j]);
    i = j;
  }
  return taut;
}

struct Polyline {
  std::vector<Vec2> pts;
  std::vector<double> arc;  // prefix arc length, arc[0] = 0

  explicit Polyline(const std::vector<Vec2>& p) : pts(p), arc(p.size(), 0.0) {
    for (std::size_t i = 1; i < pts.size(); ++i)
      arc[i] = arc[i - 1] + (pts[i] - pts[i - 1]).norm();
  }
  double total() const { return arc.back(); }
  Vec2 at(double t) const {
    const auto it = std::upper_bound(arc.begin(), arc.end(), t);
    const std::size_t i = std::min<std::size_t>(it - arc.begin(), arc.size() - 1);
    if (i == 0) return pts.front();
    const double seg = arc[i] - arc[i - 1];
    if (seg <= 0.0) return pts[i];
    const double u = std::clamp((t - arc[i - 1]) / seg, 0.0, 1.0);
    return pts[i - 1] + u * (pts[i] - pts[i - 1]);
  }
};

// Emits (t, point) samples of the polyline every `h` of arc length, then
// repairs any chord that cuts a corner by inserting the arc midpoint; the
// subdivision converges onto the (collision-free) polyline itself.
std::vector<Vec2> resample(const World2D& w, const std::vector<Vec2>& poly, double h) {
  const Polyline line(poly);
  std::vector<std::pair<double, Vec2>> samples{{0.0, poly.front()}};
  for (double t = h; t < line.total(); t += h) samples.emplace_back(t, line.at(t));
  samples.emplace_back(line.total(), poly.back());
  std::vector<Vec2> out{samples.front().second};
  for (std::size_t i = 1; i < samples.size(); ++i) {
    // Depth-first refinement between samples i-1 and i.
    std::vector<std::pair<double, Vec2>> stack{samples[i]};
    std::pair<double, Vec2> cur = samples[i - 1];
    int guard = 0;
    while (!stack.empty()) {
      const auto& next = stack.back();
      if (chord_free(w, cur.second, next.second) || ++guard > 64) {
        out.push_back(next.second);
        cur = next;
        stack.pop_back();
      } else {
        const double tm = 0.5 * (cur.first + next.first);
        stack.emplace_back(tm, line.at(tm));
      }
    }
  }
  return out;
}

struct Adam {
  Vector m, v;
  int t = 0;
};

void adam_step(Vector& params, const Vector& grad, Adam& opt, double lr) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  if (opt.m.size() == 0) {
    opt.m = Vector::Zero(params.size());
    opt.v = Vector::Zero(params.size());
  }
  ++opt.t;
  opt.m = kBeta1 * opt.m + (1.0 - kBeta1) * grad;
  opt.v = kBeta2 * opt.v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(kBeta1, opt.t), c2 = 1.0 - std::pow(kBeta2, opt.t);
  params.array() -= lr * (opt.m / c1).array() / ((opt.v / c2).array().sqrt() + kEps);
}

std::vector<int> usable_trajectories(const ExpertDataset& data) {
  std::vector<int> usable;
  for (int i = 0; i < static_cast<int>(data.trajectories.size()); ++i)
    if (data.trajectories[i].size() >= 2) usable.push_back(i);
  if (usable.empty()) throw EmptyDataError("bc training: no trajectory with two states");
  return usable;
}

// Shared SGD driver: `draw` fills (cond_a, cond_b, target) per sample.
template <typename Draw>
BcTrainResult train_gaussian(const BcConfig& cfg, std::uint64_t seed, const Draw& draw) {
  Rng root(seed);
  BcTrainResult res{SubgoalPolicy(root.derive(1).next_u64()), {}};
  Rng brng = root.derive(2);
  Adam opt;
  Vector grad = Vector::Zero(res.model.param_count());
  const double inv_b = 1.0 / cfg.batch_size;
  for (int step = 0; step < cfg.steps; ++step) {
    grad.setZero();
    double nll = 0.0;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const auto [sa, sb, target] = draw(brng);
      nll -= res.model.log_prob_grad(sa, sb, target, -inv_b, grad) * inv_b;
    }
    adam_step(res.model.params(), grad, opt, cfg.lr);
    res.loss_curve.push_back(nll);
  }
  return res;
}

}  // namespace

std::vector<Vec2> expert_path(const World2D& w, const Vec2& s, const Vec2& g) {
  const std::vector<Vec2> poly = chord_free(w, s, g) ? std::vector<Vec2>{s, g} : astar_lattice(w, s, g);
  return resample(w, shortcut(w, poly), w.step_size);
}

ExpertDataset generate_expert_dataset(const World2D& w, int count, std::uint64_t seed) {
  ExpertDataset data;
  data.trajectories.reserve(count);
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    const auto [s, g] = sample_start_goal(w, rng);
    data.trajectories.push_back(expert_path(w, s, g));
  }
  return data;
}

void save_expert_dataset(const ExpertDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& traj : data.trajectories) {
    nlohmann::json states = nlohmann::json::array();
    for (const Vec2& p : traj) states.push_back({p.x(), p.y()});
    out << nlohmann::json{{"states", states}} << "\n";
  }
}

ExpertDataset load_expert_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  ExpertDataset data;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    std::vector<Vec2> traj;
    for (const auto& p : j.at("states")) traj.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    data.trajectories.push_back(std::move(traj));
  }
  return data;
}

BcTrainResult bc_train_sgt(const ExpertDataset& data, const BcConfig& cfg, std::uint64_t seed) {
  const auto usable = usable_trajectories(data);
  return train_gaussian(cfg, seed, [&](Rng& rng) {
    const auto& traj = data.trajectories[usable[rng.uniform_index(static_cast<int>(usable.size()))]];
    const int n = static_cast<int>(traj.size());
    int a = rng.uniform_index(n);
    int b = rng.uniform_index(n);
    while (b == a) b = rng.uniform_index(n);
    if (a > b) std::swap(a, b);
    return std::make_tuple(traj[a], traj[b], traj[(a + b) / 2]);
  });
}

BcTrainResult bc_train_sequential(const ExpertDataset& data, const BcConfig& cfg,
                                  std::uint64_t seed) {
  const auto usable = usable_trajectories(data);
  return train_gaussian(cfg, seed, [&](Rng& rng) {
    const auto& traj = data.trajectories[usable[rng.uniform_index(static_cast<int>(usable.size()))]];
    const int t = rng.uniform_index(static_cast<int>(traj.size()) - 1);
    return std::make_tuple(traj[t], traj.back(), traj[t + 1]);
  });
}

std::vector<Vec2> bc_predict_sgt(const SubgoalPolicy& model, const Vec2& s, const Vec2& g, int K,
                                 PredictMode mode, Rng* rng, int* model_calls) {
  if (K < 0) throw IndexOutOfRange("bc_predict_sgt: depth must be >= 0");
  std::vector<Vec2> traj((std::size_t(1) << K) + 1);
  traj.front() = s;
  traj.back() = g;
  int calls = 0;
  const auto rec = [&](const auto& self, int a, int b, int k) -> void {
    if (k == 0) return;
    const int mid = (a + b) / 2;
    const bool sampled =
        mode == PredictMode::kSample || (mode == PredictMode::kSampleRootOnly && k == K);
    traj[mid] = sampled ? model.sample(traj[a], traj[b], *rng) : model.mean(traj[a], traj[b]);
    ++calls;
    self(self, a, mid, k - 1);
    self(self, mid, b, k - 1);
  };
  rec(rec, 0, 1 << K, K);
  if (model_calls != nullptr) *model_calls = calls;
  return traj;
}

std::vector<Vec2> bc_rollout_sequential(const SubgoalPolicy& model, const Vec2& s, const Vec2& g,
                                        double goal_threshold, int step_cap, PredictMode mode,
                                        Rng* rng, int* model_calls) {
  std::vector<Vec2> traj{s};
  int calls = 0;
  while ((traj.back() - g).norm() > goal_threshold && calls < step_cap) {
    const bool sampled = mode == PredictMode::kSample;
    traj.push_back(sampled ? model.sample(traj.back(), g, *rng) : model.mean(traj.back(), g));
    ++calls;
  }
  if (model_calls != nullptr) *model_calls = calls;
  return traj;
}

}  // namespace sgt

#include "sgt/fitted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sgt {
namespace {

// Bucket geometry for the sliced profile search. Buckets live on the unit
// square; out-of-range coordinates clamp into edge cells, which keeps the
// search exact because query ranges clamp the same way.
constexpr double kSideCell = 0.05;   // prefilter buckets over the fixed side
constexpr double kRingCell = 0.04;   // per-call buckets over the varying side
constexpr double kTauInitial = 0.18;
constexpr double kTauGrowth = 1.6;
constexpr double kTauComplete = 1.5;  // exceeds the unit-square diameter

inline int clamp_cell(double v, double cell, int n) {
  int c = static_cast<int>(v / cell);
  return std::min(std::max(c, 0), n - 1);
}

// k-best list ordered by (squared distance, original index); parallel arrays
// so the ring scan stays branch-light. Insertion deduplicates by index
// because seeded candidates are revisited by the ring walk.
struct BestList {
  double d2[16];
  int orig[16];
  int pos[16];
  int size = 0;
  int k = 1;

  void reset(int kk) {
    size = 0;
    k = kk;
  }
  bool full() const { return size == k; }
  double worst() const { return d2[size - 1]; }

  void consider(double cand_d2, int cand_orig, int cand_pos) {
    if (size == k) {
      if (cand_d2 > d2[size - 1] ||
          (cand_d2 == d2[size - 1] && cand_orig > orig[size - 1])) {
        return;
      }
    }
    for (int i = 0; i < size; ++i) {
      if (orig[i] == cand_orig) return;  // seeded duplicate
    }
    int at = size;
    while (at > 0 && (cand_d2 < d2[at - 1] ||
                      (cand_d2 == d2[at - 1] && cand_orig < orig[at - 1]))) {
      --at;
    }
    const int last = size == k ? size - 1 : size;
    for (int i = last; i > at; --i) {
      d2[i] = d2[i - 1];
      orig[i] = orig[i - 1];
      pos[i] = pos[i - 1];
    }
    d2[at] = cand_d2;
    orig[at] = cand_orig;
    pos[at] = cand_pos;
    if (size < k) ++size;
  }
};

// Per-call scratch reused across profile invocations.
struct ProfileScratch {
  std::vector<int> cand_idx;
  std::vector<double> fx2, fy2;               // fixed-side squared diffs
  std::vector<double> vx, vy, pre1, pre2;     // bucket-ordered candidate data
  std::vector<int> orig;                      // bucket-ordered original indices
  std::vector<int> cell_count, cell_start, slot;
  std::vector<int> order;  // candidate ids in bucket order
  std::vector<int> prev_pos;
};

ProfileScratch& scratch_buffers() {
  thread_local ProfileScratch s;
  return s;
}

}  // namespace

// Static bucket index over one 2-d slice (s-parts or g-parts) of the stored
// pairs; answers "all points within tau of q" by scanning covering cells.
struct PairValueModel::SideIndex {
  int nx = 0, ny = 0;
  std::vector<int> cell_start;
  std::vector<int> entries;
  std::vector<double> xs, ys;

  SideIndex(const Matrix& points, int col) {
    const int n = static_cast<int>(points.rows());
    nx = ny = static_cast<int>(std::ceil(1.0 / kSideCell));
    xs.resize(n);
    ys.resize(n);
    std::vector<int> cell(n);
    std::vector<int> count(nx * ny, 0);
    for (int i = 0; i < n; ++i) {
      xs[i] = points(i, col);
      ys[i] = points(i, col + 1);
      const int cx = clamp_cell(xs[i], kSideCell, nx);
      const int cy = clamp_cell(ys[i], kSideCell, ny);
      cell[i] = cx * ny + cy;
      ++count[cell[i]];
    }
    cell_start.assign(nx * ny + 1, 0);
    for (int c = 0; c < nx * ny; ++c) cell_start[c + 1] = cell_start[c] + count[c];
    entries.resize(n);
    std::vector<int> fill(cell_start.begin(), cell_start.end() - 1);
    for (int i = 0; i < n; ++i) entries[fill[cell[i]]++] = i;
  }

  // Appends every index with ‖p_i - q‖^2 <= tau2, keeping the squared
  // coordinate diffs as separate terms so callers can reproduce the
  // left-to-right float summation of a brute-force 4-d distance.
  void gather(const Vec2& q, double tau, double tau2, std::vector<int>& idx,
              std::vector<double>& dx2_out, std::vector<double>& dy2_out) const {
    const int x0 = clamp_cell(q.x() - tau, kSideCell, nx);
    const int x1 = clamp_cell(q.x() + tau, kSideCell, nx);
    const int y0 = clamp_cell(q.y() - tau, kSideCell, ny);
    const int y1 = clamp_cell(q.y() + tau, kSideCell, ny);
    for (int cx = x0; cx <= x1; ++cx) {
      for (int cy = y0; cy <= y1; ++cy) {
        const int c = cx * ny + cy;
        for (int e = cell_start[c]; e < cell_start[c + 1]; ++e) {
          const int i = entries[e];
          const double dx = xs[i] - q.x();
          const double dy = ys[i] - q.y();
          const double dx2 = dx * dx, dy2 = dy * dy;
          if (dx2 + dy2 <= tau2) {
            idx.push_back(i);
            dx2_out.push_back(dx2);
            dy2_out.push_back(dy2);
          }
        }
      }
    }
  }
};

PairValueModel::PairValueModel(Matrix points, Vector targets, int k)
    : points_(std::move(points)), targets_(std::move(targets)) {
  if (points_.rows() == 0) throw EmptyDataError("PairValueModel: no points");
  if (points_.cols() != 4) throw std::invalid_argument("PairValueModel: points must be m x 4");
  if (points_.rows() != targets_.size()) {
    throw std::invalid_argument("PairValueModel: points/targets size mismatch");
  }
  if (k < 1) throw std::invalid_argument("PairValueModel: k must be positive");
  if (k > 16) throw std::invalid_argument("PairValueModel: k above profile capacity (16)");
  k_ = std::min<int>(k, static_cast<int>(points_.rows()));
  tree_ = KdTree(points_);
  first_index_ = std::make_shared<const SideIndex>(points_, 0);
  second_index_ = std::make_shared<const SideIndex>(points_, 2);
}

double PairValueModel::eval(const Vec2& s, const Vec2& g) const {
  double q[4] = {s.x(), s.y(), g.x(), g.y()};
  tree_.knn(q, k_, scratch_);
  double sum = 0.0;
  for (const auto& [d2, idx] : scratch_) sum += targets_[idx];
  return sum / static_cast<double>(scratch_.size());
}

void PairValueModel::profile_from(const Vec2& s, const std::vector<Vec2>& grid,
                                  Vector& out) const {
  profile(s, true, grid, out);
}

void PairValueModel::profile_to(const Vec2& g, const std::vector<Vec2>& grid,
                                Vector& out) const {
  profile(g, false, grid, out);
}

// Exact k-NN over all (s_fixed, m_j) — or (m_j, g_fixed) — queries at once.
// Stored pairs are prefiltered by their fixed-side distance (<= tau), then
// the varying sides are bucketed so each query only walks outward cell rings
// until the k-th best distance certifies the rest. Any query whose k-th
// distance exceeds tau restarts the whole profile with a larger tau, so the
// result always equals brute-force k-NN, ties broken by insertion index.
void PairValueModel::profile(const Vec2& fixed, bool fixed_is_first,
                             const std::vector<Vec2>& grid, Vector& out) const {
  const int nq = static_cast<int>(grid.size());
  out.resize(nq);
  if (nq == 0) return;
  const int m = static_cast<int>(points_.rows());
  const SideIndex& pre_index = fixed_is_first ? *first_index_ : *second_index_;
  const int var_col = fixed_is_first ? 2 : 0;
  const int fixed_col = fixed_is_first ? 0 : 2;

  ProfileScratch& sb = scratch_buffers();
  const int rn = static_cast<int>(std::ceil(1.0 / kRingCell));

  for (double tau = kTauInitial;; tau *= kTauGrowth) {
    const bool complete = tau >= kTauComplete;
    const double tau2 = tau * tau;

    // Prefilter by the fixed side. Excluded points have fixed-side squared
    // distance > tau^2, and the full 4-d distance can only round upward from
    // there, so they can never re-enter a valid k-best set.
    sb.cand_idx.clear();
    sb.fx2.clear();
    sb.fy2.clear();
    if (complete) {
      for (int i = 0; i < m; ++i) {
        const double dx = points_(i, fixed_col) - fixed.x();
        const double dy = points_(i, fixed_col + 1) - fixed.y();
        sb.cand_idx.push_back(i);
        sb.fx2.push_back(dx * dx);
        sb.fy2.push_back(dy * dy);
      }
    } else {
      pre_index.gather(fixed, tau, tau2, sb.cand_idx, sb.fx2, sb.fy2);
    }
    const int nc = static_cast<int>(sb.cand_idx.size());
    if (nc < k_ && !complete) continue;

    // Bucket candidates by their varying side. For fixed-first the distance
    // is ((fx2 + fy2) + dx^2) + dy^2; for fixed-second it is
    // ((dx^2 + dy^2) + fx2) + fy2 — both reproduce the left-to-right float
    // summation of a brute-force 4-d distance exactly.
    sb.cell_count.assign(rn * rn + 1, 0);
    sb.slot.resize(nc);
    for (int c = 0; c < nc; ++c) {
      const int i = sb.cand_idx[c];
      const int cx = clamp_cell(points_(i, var_col), kRingCell, rn);
      const int cy = clamp_cell(points_(i, var_col + 1), kRingCell, rn);
      sb.slot[c] = cx * rn + cy;
      ++sb.cell_count[sb.slot[c] + 1];
    }
    sb.cell_start.assign(rn * rn + 1, 0);
    for (int c = 0; c < rn * rn; ++c) {
      sb.cell_start[c + 1] = sb.cell_start[c] + sb.cell_count[c + 1];
    }
    sb.order.resize(nc);
    {
      std::vector<int>& fill = sb.cell_count;  // reuse as cursor
      std::copy(sb.cell_start.begin(), sb.cell_start.end() - 1, fill.begin());
      for (int c = 0; c < nc; ++c) sb.order[fill[sb.slot[c]]++] = c;
    }
    sb.vx.resize(nc);
    sb.vy.resize(nc);
    sb.pre1.resize(nc);
    sb.pre2.resize(nc);
    sb.orig.resize(nc);
    for (int p = 0; p < nc; ++p) {
      const int c = sb.order[p];
      const int i = sb.cand_idx[c];
      sb.vx[p] = points_(i, var_col);
      sb.vy[p] = points_(i, var_col + 1);
      sb.pre1[p] = fixed_is_first ? sb.fx2[c] + sb.fy2[c] : sb.fx2[c];
      sb.pre2[p] = sb.fy2[c];
      sb.orig[p] = i;
    }

    const bool fixed_first = fixed_is_first;
    BestList best;
    sb.prev_pos.clear();
    bool valid = true;

    const auto eval_at = [&](int p, const Vec2& q) -> double {
      const double dx = sb.vx[p] - q.x();
      const double dy = sb.vy[p] - q.y();
      if (fixed_first) return (sb.pre1[p] + dx * dx) + dy * dy;
      return ((dx * dx + dy * dy) + sb.pre1[p]) + sb.pre2[p];
    };

    for (int j = 0; j < nq && valid; ++j) {
      const Vec2& q = grid[j];
      best.reset(k_);
      // Seed with the previous query's winners: their distances give an
      // immediate pruning radius for the ring walk.
      for (int p : sb.prev_pos) best.consider(eval_at(p, q), sb.orig[p], p);
      const int qx = clamp_cell(q.x(), kRingCell, rn);
      const int qy = clamp_cell(q.y(), kRingCell, rn);
      for (int r = 0; r <= 2 * rn; ++r) {
        if (r > 0 && best.full()) {
          const double bound = (r - 1) * kRingCell;
          if (bound * bound > best.worst()) break;
        }
        const int x0 = std::max(qx - r, 0), x1 = std::min(qx + r, rn - 1);
        const int y0 = std::max(qy - r, 0), y1 = std::min(qy + r, rn - 1);
        for (int cx = x0; cx <= x1; ++cx) {
          const bool edge_col = (cx == qx - r || cx == qx + r);
          for (int cy = y0; cy <= y1; ++cy) {
            if (!edge_col && cy != qy - r && cy != qy + r) continue;
            const int cell = cx * rn + cy;
            for (int p = sb.cell_start[cell]; p < sb.cell_start[cell + 1]; ++p) {
              best.consider(eval_at(p, q), sb.orig[p], p);
            }
          }
        }
      }
      if (!best.full() || (!complete && best.worst() > tau2)) {
        valid = false;
        break;
      }
      double sum = 0.0;
      for (int i = 0; i < best.size; ++i) sum += targets_[best.orig[i]];
      out[j] = sum / static_cast<double>(best.size);
      sb.prev_pos.assign(best.pos, best.pos + best.size);
    }
    if (valid) return;
    if (complete) {
      throw std::logic_error("PairValueModel: profile failed at full radius");
    }
  }
}

SearchGrid make_search_grid(const World2D& world, int resolution) {
  if (resolution < 2) throw std::invalid_argument("make_search_grid: resolution must be >= 2");
  SearchGrid grid;
  const double h = 1.0 / (resolution - 1);
  for (int ix = 0; ix < resolution; ++ix) {
    for (int iy = 0; iy < resolution; ++iy) {
      const Vec2 p(ix * h, iy * h);
      if (!world.inside_obstacle(p)) grid.points.push_back(p);
    }
  }
  if (grid.points.empty()) throw std::invalid_argument("make_search_grid: no free lattice points");
  return grid;
}

namespace {

// Level-0 regression set: real transitions keep their cost, self pairs pin
// zero, random state pairs pin c_max. Self rows precede fake rows so exact
// duplicate (s, s) features resolve to the zero target under index ties.
PairValueModel fit_level0(const std::vector<TransitionTuple>& data, double c_max, int k,
                          Rng& rng) {
  const int m = static_cast<int>(data.size());
  Matrix pts(3 * m, 4);
  Vector tgt(3 * m);
  for (int i = 0; i < m; ++i) {
    pts.row(i) << data[i].s.x(), data[i].s.y(), data[i].s_next.x(), data[i].s_next.y();
    tgt[i] = data[i].c;
    pts.row(m + i) << data[i].s.x(), data[i].s.y(), data[i].s.x(), data[i].s.y();
    tgt[m + i] = 0.0;
  }
  for (int i = 0; i < m; ++i) {
    const Vec2& a = data[rng.uniform_index(m)].s;
    const Vec2& b = data[rng.uniform_index(m)].s;
    pts.row(2 * m + i) << a.x(), a.y(), b.x(), b.y();
    tgt[2 * m + i] = c_max;
  }
  return PairValueModel(std::move(pts), std::move(tgt), k);
}

}  // namespace

ValueStackFitted fitted_sgtdp(const std::vector<TransitionTuple>& data, double c_max, int levels,
                              const SearchGrid& grid, std::uint64_t seed, int k_neighbors) {
  if (data.empty()) throw EmptyDataError("fitted_sgtdp: empty dataset");
  if (levels < 0) throw std::invalid_argument("fitted_sgtdp: levels must be >= 0");
  if (c_max <= 0.0) throw std::invalid_argument("fitted_sgtdp: c_max must be positive");
  if (grid.points.empty() && levels > 0) {
    throw std::invalid_argument("fitted_sgtdp: empty search grid");
  }
  Rng rng = Rng(seed).derive(0xf177ed);
  const int m = static_cast<int>(data.size());

  ValueStackFitted stack;
  stack.c_max = c_max;
  stack.models.reserve(levels + 1);
  stack.models.push_back(fit_level0(data, c_max, k_neighbors, rng));

  const int ng = static_cast<int>(grid.points.size());
  Vector vf(ng);
  std::vector<int> ai(m), bi(m), order(m);
  std::vector<Vector> to_profiles(m);
  for (int lvl = 1; lvl <= levels; ++lvl) {
    const PairValueModel& prev = stack.models.back();
    Matrix pts(m, 4);
    Vector tgt(m);
    // Draws repeat indices, so rows sharing a start reuse one start profile
    // (grouped sweep) and goal profiles are computed once and cached; the
    // targets are pure functions of the endpoints, so this changes nothing.
    for (int j = 0; j < m; ++j) {
      ai[j] = static_cast<int>(rng.uniform_index(m));
      bi[j] = static_cast<int>(rng.uniform_index(m));
      const Vec2& a = data[ai[j]].s;
      const Vec2& b = data[bi[j]].s;
      pts.row(j) << a.x(), a.y(), b.x(), b.y();
      order[j] = j;
    }
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return ai[x] != ai[y] ? ai[x] < ai[y] : x < y; });
    std::fill(to_profiles.begin(), to_profiles.end(), Vector());
    int prev_a = -1;
    for (const int j : order) {
      if (ai[j] != prev_a) {
        prev.profile_from(data[ai[j]].s, grid.points, vf);
        prev_a = ai[j];
      }
      Vector& vt = to_profiles[bi[j]];
      if (vt.size() == 0) {
        vt.resize(ng);
        prev.profile_to(data[bi[j]].s, grid.points, vt);
      }
      double y = std::numeric_limits<double>::infinity();
      for (int i = 0; i < ng; ++i) y = std::min(y, vf[i] + vt[i]);
      tgt[j] = y;
    }
    stack.models.emplace_back(std::move(pts), std::move(tgt), k_neighbors);
  }
  return stack;
}

namespace {

std::unique_ptr<SubGoalTree<Vec2>> extract_node(const ValueStackFitted& stack, const Vec2& a,
                                                const Vec2& b, int level,
                                                const std::vector<Vec2>& grid, Vector& vf,
                                                Vector& vt) {
  auto node = std::make_unique<SubGoalTree<Vec2>>();
  node->start = a;
  node->goal = b;
  node->depth = level;
  if (level == 0) return node;
  const PairValueModel& model = stack.models[level - 1];
  model.profile_from(a, grid, vf);
  model.profile_to(b, grid, vt);
  int arg = 0;
  double best = vf[0] + vt[0];
  for (int i = 1; i < static_cast<int>(grid.size()); ++i) {
    const double v = vf[i] + vt[i];
    if (v < best) {  // strict: ties keep the lexicographically smaller point
      best = v;
      arg = i;
    }
  }
  node->midpoint = grid[arg];
  node->left = extract_node(stack, a, node->midpoint, level - 1, grid, vf, vt);
  node->right = extract_node(stack, node->midpoint, b, level - 1, grid, vf, vt);
  return node;
}

}  // namespace

SubGoalTree<Vec2> extract_sgt_plan(const ValueStackFitted& stack, const Vec2& start,
                                   const Vec2& goal, const SearchGrid& grid) {
  if (stack.models.empty()) throw std::invalid_argument("extract_sgt_plan: empty stack");
  const int depth = static_cast<int>(stack.models.size()) - 1;
  if (depth > 0 && grid.points.empty()) {
    throw std::invalid_argument("extract_sgt_plan: empty search grid");
  }
  Vector vf, vt;
  auto root = extract_node(stack, start, goal, depth, grid.points, vf, vt);
  return std::move(*root);
}

ApproxFwResult approx_fw(const std::vector<TransitionTuple>& data, double c_max, int iterations,
                         std::uint64_t seed, const std::vector<std::pair<Vec2, Vec2>>& probe,
                         int k_neighbors) {
  if (data.empty()) throw EmptyDataError("approx_fw: empty dataset");
  if (iterations < 0) throw std::invalid_argument("approx_fw: iterations must be >= 0");
  Rng rng = Rng(seed).derive(0xaf0001);
  const int m = static_cast<int>(data.size());

  ApproxFwResult result{fit_level0(data, c_max, k_neighbors, rng), {}};
  for (int it = 1; it <= iterations; ++it) {
    Matrix pts(2 * m, 4);
    Vector tgt(2 * m);
    for (int i = 0; i < m; ++i) {  // self pairs first: duplicate ties pin 0
      pts.row(i) << data[i].s.x(), data[i].s.y(), data[i].s.x(), data[i].s.y();
      tgt[i] = 0.0;
    }
    for (int i = 0; i < m; ++i) {
      const Vec2& a = data[rng.uniform_index(m)].s;
      const Vec2& b = data[rng.uniform_index(m)].s;
      const Vec2& mid = data[rng.uniform_index(m)].s;
      const double direct = result.model.eval(a, b);
      const double via = result.model.eval(a, mid) + result.model.eval(mid, b);
      pts.row(m + i) << a.x(), a.y(), b.x(), b.y();
      tgt[m + i] = std::min(direct, via);
    }
    result.model = PairValueModel(std::move(pts), std::move(tgt), k_neighbors);
    if (!probe.empty()) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& [s, g] : probe) {
        const double v = result.model.eval(s, g);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      result.spreads.push_back(hi - lo);
    }
  }
  return result;
}

Matrix approx_fw_table(const Graph& g, int sweeps, std::uint64_t seed) {
  Rng rng = Rng(seed).derive(0xaf7ab1);
  Matrix v = g.costs;
  v.diagonal().setZero();
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int s = 0; s < g.n; ++s) {
      for (int t = 0; t < g.n; ++t) {
        const int mid = rng.uniform_index(g.n);
        v(s, t) = std::min(v(s, t), sat_add(v(s, mid), v(mid, t)));
      }
    }
  }
  return v;
}

double QModel::eval(const Vec2& s, int action, const Vec2& g) const {
  if (action < 0 || action >= static_cast<int>(per_action.size())) {
    throw InvalidActionError("QModel: action out of range");
  }
  double q[4] = {s.x(), s.y(), g.x(), g.y()};
  return per_action[action].predict(q);
}

int QModel::greedy_action(const Vec2& s, const Vec2& g) const {
  int best = 0;
  double best_q = eval(s, 0, g);
  for (int u = 1; u < static_cast<int>(per_action.size()); ++u) {
    const double q = eval(s, u, g);
    if (q < best_q) {  // strict: ties keep the smaller action id
      best_q = q;
      best = u;
    }
  }
  return best;
}

QModel fqi_universal(const std::vector<TransitionTuple>& data, int iterations, std::uint64_t seed,
                     double goal_threshold, int k_neighbors, std::optional<Vec2> fixed_goal) {
  if (data.empty()) throw EmptyDataError("fqi_universal: empty dataset");
  if (iterations < 0) throw std::invalid_argument("fqi_universal: iterations must be >= 0");
  const int m = static_cast<int>(data.size());
  std::vector<std::vector<int>> by_action(kNumActions);
  for (int i = 0; i < m; ++i) {
    const int u = data[i].u;
    if (u < 0 || u >= kNumActions) throw InvalidActionError("fqi_universal: bad action id");
    by_action[u].push_back(i);
  }
  for (int u = 0; u < kNumActions; ++u) {
    if (by_action[u].empty()) {
      throw EmptyDataError("fqi_universal: no transitions for some action");
    }
  }
  Rng rng = Rng(seed).derive(0xf91000);

  // g-feature and regression target per transition; initial fit bootstraps
  // nothing: goal = s', target = one-step cost.
  std::vector<Vec2> goals(m);
  Vector targets(m);
  for (int i = 0; i < m; ++i) {
    goals[i] = data[i].s_next;
    targets[i] = data[i].c;
  }

  auto refit = [&](QModel& q) {
    q.per_action.clear();
    q.per_action.reserve(kNumActions);
    for (int u = 0; u < kNumActions; ++u) {
      const auto& rows = by_action[u];
      Matrix pts(static_cast<int>(rows.size()), 4);
      Vector tgt(static_cast<int>(rows.size()));
      for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
        const int i = rows[r];
        pts.row(r) << data[i].s.x(), data[i].s.y(), goals[i].x(), goals[i].y();
        tgt[r] = targets[i];
      }
      q.per_action.emplace_back(std::move(pts), std::move(tgt), k_neighbors);
    }
  };

  QModel q;
  q.goal_threshold = goal_threshold;
  refit(q);
  for (int it = 0; it < iterations; ++it) {
    for (int i = 0; i < m; ++i) {
      const Vec2 g = fixed_goal ? *fixed_goal : data[rng.uniform_index(m)].s;
      double boot = 0.0;
      if ((data[i].s_next - g).norm() > goal_threshold) {
        boot = q.eval(data[i].s_next, 0, g);
        for (int u = 1; u < kNumActions; ++u) {
          boot = std::min(boot, q.eval(data[i].s_next, u, g));
        }
      }
      goals[i] = g;
      targets[i] = data[i].c + boot;
    }
    refit(q);
  }
  return q;
}

KnnClassifier fit_inverse_model(const std::vector<TransitionTuple>& data, int k_neighbors) {
  if (data.empty()) throw EmptyDataError("fit_inverse_model: empty dataset");
  const int m = static_cast<int>(data.size());
  Matrix pts(m, 4);
  std::vector<int> labels(m);
  for (int i = 0; i < m; ++i) {
    pts.row(i) << data[i].s.x(), data[i].s.y(), data[i].s_next.x(), data[i].s_next.y();
    if (data[i].u < 0 || data[i].u >= kNumActions) {
      throw InvalidActionError("fit_inverse_model: bad action id");
    }
    labels[i] = data[i].u;
  }
  const int k = std::min(k_neighbors, m);
  return KnnClassifier(std::move(pts), std::move(labels), k, kNumActions);
}

RolloutResult track_subgoals(const World2D& world, const std::vector<Vec2>& plan,
                             const Controller& controller, int max_steps) {
  if (plan.empty()) throw std::invalid_argument("track_subgoals: empty plan");
  Vec2 state = plan.front();
  std::size_t idx = 0;
  const auto advance = [&] {
    while (idx < plan.size() && (state - plan[idx]).norm() <= world.goal_threshold) ++idx;
  };
  advance();
  RolloutResult result;
  while (idx < plan.size() && result.steps < max_steps) {
    const int u = controller(state, plan[idx]);
    const auto [next, cost] = step(world, state, u);
    if (cost >= world.collision_cost) result.collided = true;
    state = next;
    ++result.steps;
    advance();
  }
  result.final_distance = (state - plan.back()).norm();
  return result;
}

Controller make_fqi_controller(const QModel& q) {
  return [&q](const Vec2& s, const Vec2& sub) { return q.greedy_action(s, sub); };
}

Controller make_im_controller(const KnnClassifier& im) {
  return [&im](const Vec2& s, const Vec2& sub) {
    const double f[4] = {s.x(), s.y(), sub.x(), sub.y()};
    return im.predict(f);
  };
}

}  // namespace sgt

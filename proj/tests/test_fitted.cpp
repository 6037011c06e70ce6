#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "sgt/exact_dp.hpp"
#include "sgt/fitted.hpp"
#include "sgt/graph.hpp"
#include "sgt/knn.hpp"
#include "sgt/rng.hpp"
#include "sgt/world2d.hpp"

using namespace sgt;

namespace {

// Reference pair-model prediction: full scan with left-to-right coordinate
// summation and (squared distance, index) tie order — the exact contract the
// sliced profile search must reproduce bit for bit.
double brute_pair_predict(const Matrix& pts, const Vector& tgt, int k, const Vec2& s,
                          const Vec2& g) {
  const double q[4] = {s.x(), s.y(), g.x(), g.y()};
  std::vector<std::pair<double, int>> all;
  for (int i = 0; i < pts.rows(); ++i) {
    double d2 = 0.0;
    for (int c = 0; c < 4; ++c) {
      const double diff = pts(i, c) - q[c];
      d2 += diff * diff;
    }
    all.emplace_back(d2, i);
  }
  std::sort(all.begin(), all.end());
  const int kk = std::min<int>(k, static_cast<int>(all.size()));
  double sum = 0.0;
  for (int i = 0; i < kk; ++i) sum += tgt[all[i].second];
  return sum / kk;
}

bool same_point(const Vec2& a, const Vec2& b) { return a.x() == b.x() && a.y() == b.y(); }

bool same_states(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_point(a[i], b[i])) return false;
  }
  return true;
}

Matrix random_pairs(int m, Rng& rng, bool snap) {
  Matrix pts(m, 4);
  for (int i = 0; i < m; ++i) {
    for (int c = 0; c < 4; ++c) {
      double v = rng.uniform();
      if (snap) v = std::round(v * 8.0) / 8.0;
      pts(i, c) = v;
    }
  }
  return pts;
}

// Empty-world lattice fixture: a 6x6 search grid doubles as the node set of
// an explicit graph whose edges are single lattice moves; non-edges cost
// c_max. Exact min-plus squaring of that matrix is the oracle for the fitted
// stack.
constexpr int kLatticeRes = 6;
constexpr int kLatticeNodes = kLatticeRes * kLatticeRes;

struct LatticeFixture {
  World2D world;  // no obstacles
  SearchGrid grid;
  std::vector<TransitionTuple> data;
  std::vector<Matrix> oracle;  // capped V_0 .. V_levels

  LatticeFixture(int levels, int replicas) {
    grid = make_search_grid(world, kLatticeRes);
    REQUIRE(grid.points.size() == kLatticeNodes);
    const auto at = [&](int ix, int iy) { return grid.points[ix * kLatticeRes + iy]; };
    Matrix v0 = Matrix::Constant(kLatticeNodes, kLatticeNodes, 10.0);
    v0.diagonal().setZero();
    std::vector<TransitionTuple> base;
    for (int ix = 0; ix < kLatticeRes; ++ix) {
      for (int iy = 0; iy < kLatticeRes; ++iy) {
        int u = 0;
        for (int dx = -1; dx <= 1; ++dx) {
          for (int dy = -1; dy <= 1; ++dy) {
            if (dx == 0 && dy == 0) continue;
            ++u;
            const int jx = ix + dx, jy = iy + dy;
            if (jx < 0 || jx >= kLatticeRes || jy < 0 || jy >= kLatticeRes) continue;
            TransitionTuple t;
            t.s = at(ix, iy);
            t.u = u % 8;
            t.s_next = at(jx, jy);
            t.c = (t.s_next - t.s).norm();
            base.push_back(t);
            v0(ix * kLatticeRes + iy, jx * kLatticeRes + jy) = t.c;
          }
        }
      }
    }
    for (int r = 0; r < replicas; ++r) data.insert(data.end(), base.begin(), base.end());
    oracle.push_back(v0);
    for (int k = 1; k <= levels; ++k) {
      oracle.push_back(min_plus_product(oracle.back(), oracle.back()));
    }
  }
};

// Fitting the lattice stack dominates this suite's runtime, so the fixture
// and its 3-level fit are shared across test cases.  The replica count keeps
// the per-level pair draws dense enough that every node pair is sampled, so
// the 1-NN stack reproduces its fitted targets verbatim on the node set.
const LatticeFixture& shared_lattice() {
  static const LatticeFixture fx(3, /*replicas=*/120);
  return fx;
}

const ValueStackFitted& shared_lattice_stack() {
  static const ValueStackFitted stack =
      fitted_sgtdp(shared_lattice().data, 10.0, 3, shared_lattice().grid, 23, /*k_neighbors=*/1);
  return stack;
}

// Levels are fitted in order from one RNG stream, so the first two models of
// the 3-level stack are exactly what a 1-level fit with the same seed yields.
ValueStackFitted depth1_lattice_stack() {
  const ValueStackFitted& full = shared_lattice_stack();
  return ValueStackFitted{{full.models[0], full.models[1]}, full.c_max};
}

}  // namespace

TEST_CASE("search grid keeps only free points in lexicographic order") {
  World2D empty;
  SearchGrid g3 = make_search_grid(empty, 3);
  REQUIRE(g3.points.size() == 9);
  CHECK(same_point(g3.points[0], Vec2(0.0, 0.0)));
  CHECK(same_point(g3.points[1], Vec2(0.0, 0.5)));
  CHECK(same_point(g3.points[2], Vec2(0.0, 1.0)));
  CHECK(same_point(g3.points[3], Vec2(0.5, 0.0)));
  CHECK(same_point(g3.points[8], Vec2(1.0, 1.0)));

  World2D wall = builtin_worlds().at("wall2d");
  SearchGrid g50 = make_search_grid(wall, 50);
  CHECK(g50.points.size() < 2500);
  for (const Vec2& p : g50.points) CHECK(!wall.inside_obstacle(p));
  for (std::size_t i = 1; i < g50.points.size(); ++i) {
    const Vec2 &a = g50.points[i - 1], &b = g50.points[i];
    CHECK((a.x() < b.x() || (a.x() == b.x() && a.y() < b.y())));
  }
}

TEST_CASE("pair-model profiles equal brute-force k-NN exactly") {
  Rng rng(99120);
  World2D empty;
  const SearchGrid grid7 = make_search_grid(empty, 7);
  for (int trial = 0; trial < 12; ++trial) {
    const int m = trial < 4 ? 3 + static_cast<int>(rng.uniform_index(6))
                            : 40 + static_cast<int>(rng.uniform_index(400));
    const bool snap = trial % 2 == 0;
    Matrix pts = random_pairs(m, rng, snap);
    if (m > 4) {
      pts.row(m - 1) = pts.row(0);  // duplicate pairs stress tie-breaking
      pts.row(m - 2) = pts.row(1);
    }
    Vector tgt(m);
    for (int i = 0; i < m; ++i) tgt[i] = rng.uniform(0.0, 10.0);
    for (int k : {1, 5}) {
      PairValueModel model(pts, tgt, k);
      Vector prof;
      for (int rep = 0; rep < 3; ++rep) {
        const Vec2 fixed(rng.uniform(), rng.uniform());
        model.profile_from(fixed, grid7.points, prof);
        for (std::size_t j = 0; j < grid7.points.size(); ++j) {
          CHECK(prof[j] == brute_pair_predict(pts, tgt, k, fixed, grid7.points[j]));
        }
        model.profile_to(fixed, grid7.points, prof);
        for (std::size_t j = 0; j < grid7.points.size(); ++j) {
          CHECK(prof[j] == brute_pair_predict(pts, tgt, k, grid7.points[j], fixed));
        }
        const Vec2 s(rng.uniform(), rng.uniform()), g(rng.uniform(), rng.uniform());
        CHECK(model.eval(s, g) == brute_pair_predict(pts, tgt, k, s, g));
      }
    }
  }
}

TEST_CASE("profile radius escalation handles clustered data and far queries") {
  Rng rng(5150);
  const int m = 60;
  Matrix pts(m, 4);
  for (int i = 0; i < m; ++i) {
    for (int c = 0; c < 4; ++c) pts(i, c) = 0.05 + 0.05 * rng.uniform();  // corner cluster
  }
  Vector tgt(m);
  for (int i = 0; i < m; ++i) tgt[i] = rng.uniform(0.0, 1.0);
  PairValueModel model(pts, tgt, 5);
  World2D empty;
  const SearchGrid grid = make_search_grid(empty, 5);
  Vector prof;
  const Vec2 far(0.95, 0.9);
  model.profile_from(far, grid.points, prof);
  for (std::size_t j = 0; j < grid.points.size(); ++j) {
    CHECK(prof[j] == brute_pair_predict(pts, tgt, 5, far, grid.points[j]));
  }
  model.profile_to(far, grid.points, prof);
  for (std::size_t j = 0; j < grid.points.size(); ++j) {
    CHECK(prof[j] == brute_pair_predict(pts, tgt, 5, grid.points[j], far));
  }
}

TEST_CASE("one-transition stack memorizes the transition and its self pair") {
  World2D empty;
  const SearchGrid grid = make_search_grid(empty, 3);
  TransitionTuple t;
  t.s = Vec2(0.5, 0.5);
  std::tie(t.s_next, t.c) = step(empty, t.s, 2);  // east
  ValueStackFitted stack = fitted_sgtdp({t}, 10.0, 0, grid, 1, /*k_neighbors=*/1);
  REQUIRE(stack.models.size() == 1);
  CHECK(stack.models[0].eval(t.s, t.s_next) == t.c);
  CHECK(stack.models[0].eval(t.s, t.s) == 0.0);

  // With the default k the prediction clamps to the mean of all three
  // stored targets.
  ValueStackFitted wide = fitted_sgtdp({t}, 10.0, 0, grid, 1, 5);
  const auto& m0 = wide.models[0];
  CHECK(m0.eval(t.s, t.s_next) ==
        brute_pair_predict(m0.points(), m0.targets(), 5, t.s, t.s_next));
}

TEST_CASE("fitted stack tracks exact DP values on a lattice graph") {
  const int levels = 3;
  const LatticeFixture& fx = shared_lattice();
  const ValueStackFitted& stack = shared_lattice_stack();
  REQUIRE(stack.models.size() == static_cast<std::size_t>(levels) + 1);
  double max_err = 0.0;
  for (int lvl = 0; lvl <= levels; ++lvl) {
    for (int i = 0; i < kLatticeNodes; ++i) {
      for (int j = 0; j < kLatticeNodes; ++j) {
        const double truth = fx.oracle[lvl](i, j);
        if (truth >= 5.0) continue;  // saturated band: c_max dominates
        const double got = stack.models[lvl].eval(fx.grid.points[i], fx.grid.points[j]);
        max_err = std::max(max_err, std::abs(got - truth));
      }
    }
  }
  CHECK(max_err <= 0.2);
}

TEST_CASE("reachable fraction of the lattice grows with the level") {
  const int levels = 3;
  const LatticeFixture& fx = shared_lattice();
  const ValueStackFitted& stack = shared_lattice_stack();
  const Vec2 goal = fx.grid.points[kLatticeNodes - 1];  // corner (1, 1)
  std::vector<double> frac;
  for (int lvl = 0; lvl <= levels; ++lvl) {
    int reach = 0;
    for (const Vec2& p : fx.grid.points) {
      if (stack.models[lvl].eval(p, goal) < 5.0) ++reach;
    }
    frac.push_back(static_cast<double>(reach) / fx.grid.points.size());
  }
  for (int lvl = 1; lvl <= levels; ++lvl) CHECK(frac[lvl] >= frac[lvl - 1]);
  CHECK(frac.back() > frac.front());
}

TEST_CASE("depth-1 plan on the empty lattice picks the straight midpoint") {
  const LatticeFixture& fx = shared_lattice();
  const ValueStackFitted stack = depth1_lattice_stack();
  const Vec2 a = fx.grid.points[2 * kLatticeRes + 2];  // (0.4, 0.4)
  const Vec2 b = fx.grid.points[4 * kLatticeRes + 2];  // (0.8, 0.4)
  SubGoalTree<Vec2> plan = extract_sgt_plan(stack, a, b, fx.grid);
  CHECK(plan.depth == 1);
  CHECK((plan.midpoint - Vec2(0.6, 0.4)).norm() <= 0.1);

  // Identical queries give identical plans.
  SubGoalTree<Vec2> again = extract_sgt_plan(stack, a, b, fx.grid);
  CHECK(same_states(flatten(plan), flatten(again)));
}

TEST_CASE("start equal to goal extracts an all-repeat plan") {
  const LatticeFixture& fx = shared_lattice();
  const ValueStackFitted stack = depth1_lattice_stack();
  const Vec2 s = fx.grid.points[2 * kLatticeRes + 2];  // (0.4, 0.4)
  const auto states = flatten(extract_sgt_plan(stack, s, s, fx.grid));
  REQUIRE(states.size() == 3);
  for (const Vec2& p : states) CHECK(same_point(p, s));
}

TEST_CASE("corridor plan stays out of obstacles and is deterministic") {
  World2D corridor = builtin_worlds().at("corridor_simple");
  const auto data = sample_dataset(corridor, 3000, 404);
  const SearchGrid grid = make_search_grid(corridor, 21);
  ValueStackFitted stack = fitted_sgtdp(data, 10.0, 4, grid, 50, 5);
  const Vec2 start(0.05, 0.05), goal(0.95, 0.95);
  const auto states = flatten(extract_sgt_plan(stack, start, goal, grid));
  REQUIRE(states.size() == 17);
  CHECK(same_point(states.front(), start));
  CHECK(same_point(states.back(), goal));
  for (const Vec2& p : states) CHECK(!corridor.inside_obstacle(p));
  CHECK(same_states(states, flatten(extract_sgt_plan(stack, start, goal, grid))));
}

TEST_CASE("tabular randomized relaxation converges to Floyd-Warshall") {
  const Graph g4 = make_graph(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 2, 2.0},
                                  {1, 3, 5.0}, {0, 3, 10.0}});
  const Matrix v = approx_fw_table(g4, 200, 9);
  const Matrix truth = floyd_warshall(g4);
  CHECK((v - truth).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("one relaxation sweep never raises targets above the initial fit") {
  World2D corridor = builtin_worlds().at("corridor_simple");
  const auto data = sample_dataset(corridor, 500, 77);
  const ApproxFwResult r0 = approx_fw(data, 10.0, 0, 1234);
  const ApproxFwResult r1 = approx_fw(data, 10.0, 1, 1234);
  const int m = static_cast<int>(data.size());
  REQUIRE(r1.model.size() == 2 * m);
  for (int i = m; i < 2 * m; ++i) {  // relaxed rows; self rows come first
    const Vec2 a(r1.model.points()(i, 0), r1.model.points()(i, 1));
    const Vec2 b(r1.model.points()(i, 2), r1.model.points()(i, 3));
    CHECK(r1.model.targets()[i] <= r0.model.eval(a, b) + 1e-12);
  }
}

TEST_CASE("repeated approximate relaxation collapses the value spread") {
  // Sparse data gives the regressor wide neighborhoods, so the zero-pinned
  // diagonal bleeds outward and the min-relaxation drags every moderately
  // separated pair toward zero within a few sweeps.  Denser datasets collapse
  // too, only over more sweeps than this test wants to spend.
  World2D corridor = builtin_worlds().at("corridor_simple");
  const auto data = sample_dataset(corridor, 60, 1);
  Rng rng(808);
  std::vector<std::pair<Vec2, Vec2>> probe;
  while (probe.size() < 100) {
    const Vec2 a = sample_free_state(corridor, rng);
    const Vec2 b = sample_free_state(corridor, rng);
    if ((a - b).norm() >= 0.3) probe.emplace_back(a, b);
  }
  const ApproxFwResult r = approx_fw(data, 10.0, 10, 38, probe);
  REQUIRE(r.spreads.size() == 10);
  CHECK(r.spreads[0] >= 5.0);                  // iteration 1 still has structure
  CHECK(r.spreads[9] * 10.0 <= r.spreads[0]);  // tenfold collapse by sweep 10
}

TEST_CASE("fqi truncates the bootstrap inside the goal threshold") {
  // Every transition stays inside a blob of diameter < 0.15, so all drawn
  // goals are "reached" and every regression target equals the step cost.
  World2D empty;
  Rng rng(3030);
  std::vector<TransitionTuple> data;
  for (int i = 0; i < 200; ++i) {
    TransitionTuple t;
    t.s = Vec2(0.45 + 0.07 * rng.uniform(), 0.45 + 0.07 * rng.uniform());
    t.u = static_cast<int>(rng.uniform_index(kNumActions));
    std::tie(t.s_next, t.c) = step(empty, t.s, t.u);
    data.push_back(t);
  }
  const QModel q = fqi_universal(data, 3, 11);
  for (int u = 0; u < kNumActions; ++u) {
    CHECK(q.eval(Vec2(0.48, 0.48), u, Vec2(0.5, 0.5)) ==
          doctest::Approx(empty.free_cost).epsilon(1e-12));
  }
}

TEST_CASE("fqi with a fixed goal reaches it from most starts") {
  // Density matters: the blocked strip along each wall face is one step
  // (0.025) wide, and the per-action neighborhoods must resolve it or greedy
  // rollouts stall against walls.  40K tuples put the 5-NN radius below that.
  World2D corridor = builtin_worlds().at("corridor_simple");
  const auto data = sample_dataset(corridor, 40000, 21);
  const Vec2 goal(0.9, 0.9);
  const QModel q = fqi_universal(data, 60, 17, 0.15, 5, goal);
  const Controller ctl = make_fqi_controller(q);
  Rng rng(606);
  int success = 0;
  const int trials = 20;
  for (int i = 0; i < trials; ++i) {
    const Vec2 start = sample_free_state(corridor, rng);
    const RolloutResult r = track_subgoals(corridor, {start, goal}, ctl);
    if (r.final_distance <= corridor.goal_threshold) ++success;
  }
  CHECK(success >= 18);  // near-perfect goal reaching
}

TEST_CASE("inverse model memorizes stored transitions with k=1") {
  World2D corridor = builtin_worlds().at("corridor_simple");
  const auto data = sample_dataset(corridor, 500, 63);
  const KnnClassifier im = fit_inverse_model(data, 1);
  for (int i = 0; i < 20; ++i) {
    const double f[4] = {data[i].s.x(), data[i].s.y(), data[i].s_next.x(), data[i].s_next.y()};
    CHECK(im.predict(f) == data[i].u);
  }
}

TEST_CASE("inverse model recovers an eastward move in free space") {
  // Needs enough density that several eastward transitions start within the
  // query's neighborhood; sparser datasets let other directions win the vote.
  World2D empty;
  const auto data = sample_dataset(empty, 20000, 42);
  const KnnClassifier im = fit_inverse_model(data);
  const double f[4] = {0.5, 0.5, 0.525, 0.5};
  const double g[4] = {0.3, 0.7, 0.325, 0.7};
  CHECK(im.predict(f) == 2);  // E is action 2 (N first, clockwise)
  CHECK(im.predict(g) == 2);
}

TEST_CASE("tracking a plan that starts satisfied takes no steps") {
  World2D empty;
  int calls = 0;
  const Controller never = [&](const Vec2&, const Vec2&) {
    ++calls;
    return 0;
  };
  const Vec2 s(0.3, 0.7);
  const RolloutResult r = track_subgoals(empty, {s}, never);
  CHECK(r.steps == 0);
  CHECK(r.final_distance == 0.0);
  CHECK(!r.collided);
  CHECK(calls == 0);
}

TEST_CASE("tracking walks to a distant subgoal and stops inside the threshold") {
  World2D empty;
  const Controller east = [](const Vec2&, const Vec2&) { return 2; };
  const RolloutResult r = track_subgoals(empty, {Vec2(0.4, 0.5), Vec2(0.8, 0.5)}, east);
  CHECK(!r.collided);
  CHECK(r.steps <= 12);
  CHECK(r.final_distance <= empty.goal_threshold + 1e-9);
}

TEST_CASE("tracking records collisions and respects max_steps") {
  World2D slab;
  slab.obstacles.push_back({0.5, 0.2, 0.6, 0.8});
  const Controller east = [](const Vec2&, const Vec2&) { return 2; };
  const RolloutResult r = track_subgoals(slab, {Vec2(0.45, 0.5), Vec2(0.9, 0.5)}, east, 25);
  CHECK(r.collided);
  CHECK(r.steps == 25);
  CHECK(r.final_distance > slab.goal_threshold);
}

TEST_CASE("fitted operations validate their inputs") {
  World2D empty;
  const SearchGrid grid = make_search_grid(empty, 3);
  CHECK_THROWS_AS(fitted_sgtdp({}, 10.0, 2, grid, 1), EmptyDataError);
  CHECK_THROWS_AS(approx_fw({}, 10.0, 1, 1), EmptyDataError);
  CHECK_THROWS_AS(fqi_universal({}, 1, 1), EmptyDataError);
  CHECK_THROWS_AS(fit_inverse_model({}), EmptyDataError);
  TransitionTuple t;
  t.s = Vec2(0.5, 0.5);
  std::tie(t.s_next, t.c) = step(empty, t.s, 0);
  CHECK_THROWS_AS(fitted_sgtdp({t}, 10.0, -1, grid, 1), std::invalid_argument);
  CHECK_THROWS_AS(track_subgoals(empty, {}, [](const Vec2&, const Vec2&) { return 0; }),
                  std::invalid_argument);
}

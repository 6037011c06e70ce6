#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "sgt/exact_dp.hpp"

using namespace sgt;

TEST_CASE("sgtdp reproduces the worked G4 values") {
  ValueStack st = sgtdp(make_g4());
  REQUIRE(st.tables.size() == 3);  // levels 0..2 for n = 4
  CHECK(st.tables[1](0, 2) == 2.0);
  CHECK(st.tables[1](0, 3) == 6.0);
  CHECK(st.tables[2](0, 3) == 3.0);
}

TEST_CASE("sgtdp keeps the diagonal at zero on every level") {
  Rng rng(1);
  Graph g = random_graph(9, 0.4, 1, 9, rng);
  for (const Matrix& v : sgtdp(g).tables) {
    CHECK(v.diagonal().cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("sgtdp levels are monotone and the top table satisfies the triangle property") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 3 + rng.uniform_index(10);
    Graph g = random_graph(n, 0.4, 1, 9, rng);
    ValueStack st = sgtdp(g);
    for (std::size_t k = 1; k < st.tables.size(); ++k) {
      CHECK((st.tables[k].array() <= st.tables[k - 1].array()).all());
    }
    const Matrix& top = st.tables.back();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int m = 0; m < n; ++m)
          CHECK(top(i, j) <= sat_add(top(i, m), top(m, j)));
  }
}

TEST_CASE("level k matches the bounded-hop enumeration oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 3 + rng.uniform_index(6);
    Graph g = random_graph(n, 0.5, 1, 9, rng);
    ValueStack st = sgtdp(g);
    for (std::size_t k = 0; k < st.tables.size(); ++k) {
      Matrix expect = oracle_all_pairs(g, 1 << k);
      CHECK((st.tables[k] - expect).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("floyd_warshall matches the G4 fixture and the empty graph") {
  Matrix v = floyd_warshall(make_g4());
  CHECK(v(0, 3) == 3.0);
  CHECK(v(0, 2) == 2.0);
  CHECK(v(1, 3) == 2.0);

  Matrix e = floyd_warshall(make_graph(3, {}));
  CHECK(e(0, 1) == kCostMax);
  CHECK(e(2, 0) == kCostMax);
  CHECK(e.diagonal().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("all exact solvers agree with the enumeration oracle") {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    int n = (trial % 3 == 0) ? 4 : (trial % 3 == 1 ? 8 : 16);
    Graph g = random_graph(n, 0.5, 1, 9, rng);
    Matrix fw = floyd_warshall(g);
    Matrix top = sgtdp(g).tables.back();
    Matrix btop = bellman_finite_horizon(g).tables.back();
    Matrix expect = oracle_all_pairs(g, n - 1);
    CHECK((fw - expect).cwiseAbs().maxCoeff() == 0.0);
    CHECK((top - expect).cwiseAbs().maxCoeff() == 0.0);
    CHECK((btop - expect).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("bellman horizon tables match the G4 example and the hop oracle") {
  Graph g = make_g4();
  BellmanStack st = bellman_finite_horizon(g);
  REQUIRE(st.tables.size() == 4);
  CHECK(st.tables[2](0, 3) == 3.0);
  for (const Matrix& v : st.tables) CHECK(v.diagonal().cwiseAbs().maxCoeff() == 0.0);

  Rng rng(5);
  for (int trial = 0; trial < 8; ++trial) {
    int n = 3 + rng.uniform_index(5);
    Graph h = random_graph(n, 0.5, 1, 9, rng);
    BellmanStack bs = bellman_finite_horizon(h);
    for (std::size_t k = 0; k < bs.tables.size(); ++k) {
      Matrix expect = oracle_all_pairs(h, static_cast<int>(k) + 1);
      CHECK((bs.tables[k] - expect).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("greedy SGT extraction on G4 reproduces the worked trajectory") {
  Graph g = make_g4();
  ValueStack st = sgtdp(g);
  SubGoalTree<int> tree = greedy_sgt_trajectory(st, 0, 3);
  std::vector<int> states = flatten(tree);
  CHECK(states == std::vector<int>{0, 0, 1, 2, 3});
  CHECK(trajectory_cost(g, states) == 3.0);
}

TEST_CASE("greedy SGT on a trivial pair repeats the state at zero cost") {
  Graph g = make_g4();
  ValueStack st = sgtdp(g);
  std::vector<int> states = flatten(greedy_sgt_trajectory(st, 2, 2));
  for (int s : states) CHECK(s == 2);
  CHECK(trajectory_cost(g, states) == 0.0);
}

TEST_CASE("greedy SGT cost equals the optimal cost on random graphs") {
  Rng rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 2 + rng.uniform_index(15);
    Graph g = random_graph(n, 0.4, 1, 9, rng);
    ValueStack st = sgtdp(g);
    Matrix fw = floyd_warshall(g);
    for (int s = 0; s < n; ++s) {
      for (int t = 0; t < n; ++t) {
        if (fw(s, t) >= kCostMax) {
          CHECK_THROWS_AS(greedy_sgt_trajectory(st, s, t), UnreachableError);
        } else {
          double c = trajectory_cost(g, flatten(greedy_sgt_trajectory(st, s, t)));
          CHECK(c == fw(s, t));
        }
      }
    }
  }
}

TEST_CASE("greedy bellman per-horizon recovers the optimum on G4") {
  Graph g = make_g4();
  BellmanStack st = bellman_finite_horizon(g);
  Trajectory tr = greedy_bellman_trajectory(g, st, 0, 3, BellmanMode::kPerHorizon);
  CHECK(tr.total_cost() == 3.0);
  CHECK(tr.states.back() == 3);

  Trajectory same = greedy_bellman_trajectory(g, st, 1, 1, BellmanMode::kPerHorizon);
  CHECK(same.total_cost() == 0.0);
  for (int s : same.states) CHECK(s == 1);
}

TEST_CASE("greedy bellman with exact tables is optimal on random graphs") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 3 + rng.uniform_index(8);
    Graph g = random_graph(n, 0.6, 1, 9, rng);
    BellmanStack st = bellman_finite_horizon(g);
    Matrix fw = floyd_warshall(g);
    for (int s = 0; s < n; ++s) {
      for (int t = 0; t < n; ++t) {
        if (fw(s, t) >= kCostMax) continue;
        Trajectory tr = greedy_bellman_trajectory(g, st, s, t, BellmanMode::kPerHorizon);
        CHECK(tr.total_cost() == fw(s, t));
      }
    }
  }
}

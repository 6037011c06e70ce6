#include "sgt/graph.hpp"

#include <fstream>

#include <json.hpp>

namespace sgt {

Graph make_graph(int n, const std::vector<Edge>& edges) {
  if (n <= 0) throw std::invalid_argument("node count must be positive");
  Graph g;
  g.n = n;
  g.costs = Matrix::Constant(n, n, kCostMax);
  g.costs.diagonal().setZero();
  for (const Edge& e : edges) {
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n)
      throw std::out_of_range("edge endpoint out of range");
    if (e.cost < 0.0) throw NegativeCostError("edge cost must be nonnegative");
    if (e.from == e.to) {
      if (e.cost > 0.0) throw SelfEdgeNonzeroError("self edge must have zero cost");
      continue;
    }
    g.costs(e.from, e.to) = std::min(g.costs(e.from, e.to), clamp_cost(e.cost));
  }
  return g;
}

Graph random_graph(int n, double density, int cost_lo, int cost_hi, Rng& rng) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (rng.uniform() < density) {
        int c = cost_lo + rng.uniform_index(cost_hi - cost_lo + 1);
        edges.push_back({i, j, static_cast<double>(c)});
      }
    }
  }
  return make_graph(n, edges);
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  nlohmann::json j;
  in >> j;
  int n = j.at("n").get<int>();
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges")) {
    edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
  }
  return make_graph(n, edges);
}

void save_graph(const Graph& g, const std::string& path) {
  nlohmann::json edges = nlohmann::json::array();
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      if (i != j && g.costs(i, j) < kCostMax) {
        edges.push_back({i, j, g.costs(i, j)});
      }
    }
  }
  nlohmann::json out = {{"n", g.n}, {"edges", edges}};
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write graph file: " + path);
  f << out.dump(2) << "\n";
}

double trajectory_cost(const Graph& g, const std::vector<int>& states) {
  if (states.empty()) throw std::invalid_argument("trajectory must be nonempty");
  double c = 0.0;
  for (std::size_t t = 0; t + 1 < states.size(); ++t) {
    c = sat_add(c, g.costs(states[t], states[t + 1]));
  }
  return c;
}

Trajectory make_trajectory(const Graph& g, std::vector<int> states) {
  Trajectory tr;
  tr.segment_costs.reserve(states.size());
  for (std::size_t t = 0; t + 1 < states.size(); ++t) {
    tr.segment_costs.push_back(g.costs(states[t], states[t + 1]));
  }
  tr.states = std::move(states);
  return tr;
}

}  // namespace sgt

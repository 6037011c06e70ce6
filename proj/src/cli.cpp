#include "sgt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sgt/bc.hpp"
#include "sgt/exact_dp.hpp"
#include "sgt/fitted.hpp"
#include "sgt/graph.hpp"
#include "sgt/perturb.hpp"
#include "sgt/policy.hpp"
#include "sgt/rng.hpp"
#include "sgt/sgt_pg.hpp"
#include "sgt/world2d.hpp"

namespace sgt::cli {
namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNumericError = 2;

// Every run records the settings it actually used next to its main output.
void write_resolved_config(const json& cfg, const std::string& out_path) {
  std::ofstream f(out_path + ".config.json");
  if (!f) throw std::runtime_error("cannot write resolved config for " + out_path);
  f << cfg.dump(2) << "\n";
}

// Append-only cross-run result rows consumed by the report subcommand.
void append_summary(const std::string& path, const std::string& experiment,
                    const std::string& method, std::uint64_t seed,
                    const std::vector<std::pair<std::string, double>>& metrics) {
  if (path.empty()) return;
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream f(path, std::ios::app);
  if (!f) throw std::runtime_error("cannot open summary file: " + path);
  if (fresh) f << "experiment,method,seed,metric,value\n";
  for (const auto& [metric, value] : metrics)
    f << experiment << ',' << method << ',' << seed << ',' << metric << ',' << value << "\n";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  return f;
}

void write_table_block(std::ofstream& f, const std::string& label, const Matrix& m) {
  f << "# " << label << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) f << (j ? "," : "") << m(i, j);
    f << "\n";
  }
}

// ---------------------------------------------------------------------------
// exact

struct ExactOpts {
  std::string graph;
  int source = 0;
  int target = 0;
  std::string method = "sgt";
  std::string dump_tables;
};

int run_exact(const ExactOpts& o) {
  const Graph g = load_graph(o.graph);
  if (o.source < 0 || o.source >= g.n || o.target < 0 || o.target >= g.n) {
    std::cerr << "exact: source/target out of range for n = " << g.n << "\n";
    return kConfigError;
  }
  std::vector<int> states;
  std::vector<Matrix> tables;
  if (o.method == "sgt") {
    const ValueStack st = sgtdp(g);
    states = flatten(greedy_sgt_trajectory(st, o.source, o.target));
    tables = st.tables;
  } else if (o.method == "bellman") {
    const BellmanStack st = bellman_finite_horizon(g);
    states = greedy_bellman_trajectory(g, st, o.source, o.target, BellmanMode::kPerHorizon).states;
    tables = st.tables;
  } else {
    const Matrix d = floyd_warshall(g);
    if (d(o.source, o.target) >= kCostMax)
      throw UnreachableError("exact: target unreachable from source");
    // Walk argmin_m c(cur, m) + d(m, target); the table is exact, so with
    // positive costs this traces an optimal path. The hop cap guards
    // zero-cost cycles and the final state is forced to the target.
    states = {o.source};
    int cur = o.source;
    for (int hop = 0; cur != o.target && hop < g.n; ++hop) {
      int best = -1;
      double best_v = std::numeric_limits<double>::infinity();
      for (int m = 0; m < g.n; ++m) {
        if (m == cur) continue;
        const double v = sat_add(g.cost(cur, m), d(m, o.target));
        if (v < best_v) {
          best_v = v;
          best = m;
        }
      }
      cur = best;
      states.push_back(cur);
    }
    if (cur != o.target) states.push_back(o.target);
    tables = {d};
  }
  const json out{{"cost", trajectory_cost(g, states)}, {"states", states}};
  std::cout << out.dump() << "\n";
  if (!o.dump_tables.empty()) {
    std::ofstream f = open_out(o.dump_tables);
    for (std::size_t k = 0; k < tables.size(); ++k)
      write_table_block(f, "table " + std::to_string(k), tables[k]);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// perturb

struct PerturbOpts {
  int n = 8;
  double eps = 0.05;
  double delta = 0.0;  // fig5 table slack; defaults to eps/2 when unset
  int trials = 100;
  std::string family = "random";
  std::uint64_t seed = 7;
  std::string out = "perturb.csv";
  double density = 0.5;
  int cost_lo = 1;
  int cost_hi = 9;
};

int run_perturb(const PerturbOpts& o, const json& cfg) {
  std::ofstream f = open_out(o.out);
  f << "n,eps,trial,method,true_cost,optimal_cost,excess,bound\n";
  bool violated = false;
  const auto emit = [&](int trial, const std::string& method, double true_cost,
                        double optimal_cost, double bound) {
    f << o.n << ',' << o.eps << ',' << trial << ',' << method << ',' << true_cost << ','
      << optimal_cost << ',' << (true_cost - optimal_cost) << ',' << bound << "\n";
    if (true_cost > bound + 1e-9) violated = true;
  };
  Rng root(o.seed);
  const double sgt_slack = 4.0 * o.n * std::log2(static_cast<double>(o.n)) * o.eps;
  if (o.family == "random") {
    const double bellman_slack = static_cast<double>(o.n) * (o.n - 1) * o.eps;
    for (int trial = 0; trial < o.trials; ++trial) {
      Rng grng = root.derive(10 + trial);
      const Graph g = random_graph(o.n, o.density, o.cost_lo, o.cost_hi, grng);
      const Matrix opt = floyd_warshall(g);
      Rng prng = root.derive(1000 + trial);
      int s = 0, t = 0;
      bool found = false;
      for (int attempt = 0; attempt < 64 && !found; ++attempt) {
        s = prng.uniform_index(g.n);
        t = prng.uniform_index(g.n);
        found = s != t && opt(s, t) < kCostMax;
      }
      if (!found) continue;  // disconnected draw; skip the trial
      const NoiseSpec spec{o.eps, root.derive(5000 + trial).next_u64(), NoiseKind::kUniformPmEps};
      const ValueStack vs = perturbed_sgtdp(g, spec);
      const double sgt_cost = trajectory_cost(g, flatten(greedy_sgt_trajectory(vs, s, t)));
      emit(trial, "sgt_greedy", sgt_cost, opt(s, t), opt(s, t) + sgt_slack);
      const auto bt = perturbed_bellman(g, spec);
      const double bell_cost =
          greedy_bellman_trajectory(g, bt, s, t, BellmanMode::kPerHorizon).total_cost();
      emit(trial, "bellman_greedy", bell_cost, opt(s, t), opt(s, t) + bellman_slack);
    }
  } else if (o.family == "fig4") {
    const auto adv = adversarial_single_v(o.n, o.eps);
    const int target = adv.graph.n - 1;
    const double optimal = o.n * o.eps;
    const Trajectory walk =
        greedy_bellman_trajectory(adv.graph, {adv.table}, 0, target, BellmanMode::kSingleV);
    emit(0, "bellman_single", walk.total_cost(), optimal, kCostMax);
    const ValueStack vs = sgtdp(adv.graph);
    const double sgt_cost =
        trajectory_cost(adv.graph, flatten(greedy_sgt_trajectory(vs, 0, target)));
    emit(0, "sgt_exact", sgt_cost, optimal, optimal);
  } else {  // fig5
    const double delta = o.delta > 0.0 ? o.delta : o.eps / 2.0;
    const auto adv = adversarial_multi_v(o.n, o.eps, delta);
    emit(0, "bellman_perhorizon", adv.greedy_cost, adv.optimal_cost,
         (static_cast<double>(o.n) * o.n - o.n) * o.eps / 2.0);
    const NoiseSpec spec{o.eps, root.derive(1).next_u64(), NoiseKind::kUniformPmEps};
    const ValueStack vs = perturbed_sgtdp(adv.graph, spec);
    const int target = adv.graph.n - 1;
    const double sgt_cost =
        trajectory_cost(adv.graph, flatten(greedy_sgt_trajectory(vs, 0, target)));
    const double slack = 4.0 * adv.graph.n * std::log2(static_cast<double>(adv.graph.n)) * o.eps;
    emit(0, "sgt_greedy", sgt_cost, adv.optimal_cost, adv.optimal_cost + slack);
  }
  write_resolved_config(cfg, o.out);
  if (violated) {
    std::cerr << "perturb: at least one trajectory exceeded its theoretical bound\n";
    return kNumericError;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// fitted

struct FittedOpts {
  std::string world = "corridor_simple";
  int tuples = 20000;
  int depth = 6;
  double cmax = 10.0;
  std::uint64_t seed = 3;
  std::string out = "results.csv";
  std::string heatmap;
  int eval_pairs = 200;
  int fqi_iters = 24;
  int knn = 5;
  int grid_res = 50;
  double goal_x = 1.0;
  double goal_y = 1.0;
  std::string summary;
};

int run_fitted(const FittedOpts& o, const json& cfg) {
  const World2D w = resolve_world(o.world);
  const auto data = sample_dataset(w, o.tuples, o.seed);
  const auto grid = make_search_grid(w, o.grid_res);
  const auto stack = fitted_sgtdp(data, o.cmax, o.depth, grid, o.seed, o.knn);

  if (!o.heatmap.empty()) {
    // Values of every fitted level toward the fixed goal over the full
    // lattice (blocked cells included), one row-major block per level.
    std::vector<Vec2> lattice;
    lattice.reserve(static_cast<std::size_t>(o.grid_res) * o.grid_res);
    const double h = 1.0 / (o.grid_res - 1);
    for (int ix = 0; ix < o.grid_res; ++ix)
      for (int iy = 0; iy < o.grid_res; ++iy) lattice.emplace_back(ix * h, iy * h);
    std::ofstream hf = open_out(o.heatmap);
    Vector vals;
    for (std::size_t k = 0; k < stack.models.size(); ++k) {
      stack.models[k].profile_to({o.goal_x, o.goal_y}, lattice, vals);
      hf << "# level " << k << "\n";
      for (int ix = 0; ix < o.grid_res; ++ix) {
        for (int iy = 0; iy < o.grid_res; ++iy)
          hf << (iy ? "," : "") << vals[ix * o.grid_res + iy];
        hf << "\n";
      }
    }
  }

  const QModel q =
      fqi_universal(data, o.fqi_iters, Rng(o.seed).derive(11).next_u64(), w.goal_threshold, o.knn);
  const KnnClassifier im = fit_inverse_model(data, o.knn);
  const Controller fqi_ctl = make_fqi_controller(q);
  const Controller im_ctl = make_im_controller(im);

  std::ofstream f = open_out(o.out);
  f << "method,pair_id,final_distance,collided,steps\n";
  struct Acc {
    double dist = 0.0, coll = 0.0, steps = 0.0;
  };
  std::map<std::string, Acc> acc;
  const auto emit = [&](const std::string& method, int pid, const RolloutResult& r) {
    f << method << ',' << pid << ',' << r.final_distance << ',' << (r.collided ? 1 : 0) << ','
      << r.steps << "\n";
    acc[method].dist += r.final_distance;
    acc[method].coll += r.collided ? 1.0 : 0.0;
    acc[method].steps += r.steps;
  };
  Rng er = Rng(o.seed).derive(7001);
  for (int pid = 0; pid < o.eval_pairs; ++pid) {
    const Vec2 a = sample_free_state(w, er);
    const Vec2 b = sample_free_state(w, er);
    const auto plan = flatten(extract_sgt_plan(stack, a, b, grid));
    emit("sgtdp_im", pid, track_subgoals(w, plan, im_ctl));
    emit("sgtdp_fqi", pid, track_subgoals(w, plan, fqi_ctl));
    emit("fqi", pid, track_subgoals(w, {a, b}, fqi_ctl));
  }
  for (const auto& [method, a] : acc)
    append_summary(o.summary, "fitted", method, o.seed,
                   {{"mean_final_distance", a.dist / o.eval_pairs},
                    {"collision_rate", a.coll / o.eval_pairs},
                    {"mean_steps", a.steps / o.eval_pairs}});
  write_resolved_config(cfg, o.out);
  return kOk;
}

// ---------------------------------------------------------------------------
// pg

struct PgOpts {
  std::string world = "wall2d";
  int depth = 2;
  int cycles = 200;
  std::uint64_t seed = 1;
  std::string method = "sgt";
  std::string out = "curve.csv";
  int eval_pairs = 100;
  int subgoals = 3;  // sequential baseline only
  int pairs = 30;
  int repeats = 10;
  int ppo_steps = 5;
  int patience = 20;
  std::string policy_out;
  std::string summary;
};

int run_pg(const PgOpts& o, const json& cfg) {
  const World2D w = resolve_world(o.world);
  TrainConfig tc;
  tc.depth = o.depth;
  tc.pairs_per_cycle = o.pairs;
  tc.repeats = o.repeats;
  tc.ppo_steps = o.ppo_steps;
  tc.max_cycles = o.cycles;
  tc.eval_pairs = o.eval_pairs;
  tc.patience = o.patience;
  const TrainResult res =
      o.method == "sgt" ? train_sgt_pg(w, tc, o.seed) : train_seq_sg(w, o.subgoals, tc, o.seed);

  std::ofstream f = open_out(o.out);
  f << "cycle,depth_being_trained,mean_cost,success_rate\n";
  for (const CurvePoint& p : res.curve)
    f << p.cycle << ',' << p.depth << ',' << p.mean_cost << ',' << p.success_rate << "\n";

  // Held-out evaluation on a stream the trainer never touches.
  Rng hr = Rng(o.seed).derive(0x4E1D);
  double cost_sum = 0.0, succ = 0.0;
  for (int i = 0; i < o.eval_pairs; ++i) {
    const auto [a, b] = sample_start_goal(w, hr);
    const std::vector<Vec2> traj =
        o.method == "sgt" ? predict_subgoals(res.policies, a, b, o.depth, PredictMode::kMean)
                          : seq_rollout(res.policies[0], a, b, o.subgoals);
    for (const double c : leaf_costs(w, traj)) cost_sum += c;
    succ += trajectory_success(w, traj) ? 1.0 : 0.0;
  }

  json pol{{"method", o.method},
           {"layers", json::array({4, 20, 20, 20, 4})},
           {"extra_parameters", 2},
           {"policies", json::array()}};
  if (o.method == "sgt")
    pol["depth"] = o.depth;
  else
    pol["subgoals"] = o.subgoals;
  for (const SubgoalPolicy& p : res.policies) {
    pol["policies"].push_back(
        std::vector<double>(p.params().data(), p.params().data() + p.params().size()));
  }
  const std::string pol_path = o.policy_out.empty() ? o.out + ".policy.json" : o.policy_out;
  open_out(pol_path) << pol.dump() << "\n";

  const std::string method_id =
      o.method == "sgt" ? "sgt_pg" : "seq_sg@" + std::to_string(o.subgoals);
  append_summary(o.summary, "pg", method_id, o.seed,
                 {{"success_rate", succ / o.eval_pairs}, {"mean_cost", cost_sum / o.eval_pairs}});
  write_resolved_config(cfg, o.out);
  return kOk;
}

// ---------------------------------------------------------------------------
// bc

struct BcOpts {
  std::string world = "corridor_simple";
  int demos = 5000;
  int depth = 4;
  std::string method = "sgt";
  std::uint64_t seed = 2;
  std::string out = "bc_results.csv";
  std::string demo_cache;
  int steps = 4000;
  int batch = 64;
  double lr = 0.005;
  int eval_pairs = 200;
  int step_cap = 400;
  std::string summary;
};

int run_bc(const BcOpts& o, const json& cfg) {
  const World2D w = resolve_world(o.world);
  ExpertDataset data;
  if (!o.demo_cache.empty() && std::filesystem::exists(o.demo_cache)) {
    data = load_expert_dataset(o.demo_cache);
  } else {
    data = generate_expert_dataset(w, o.demos, Rng(o.seed).derive(0xD0).next_u64());
    if (!o.demo_cache.empty()) save_expert_dataset(data, o.demo_cache);
  }
  const BcConfig bcfg{o.steps, o.batch, o.lr};
  const BcTrainResult res =
      o.method == "sgt" ? bc_train_sgt(data, bcfg, o.seed) : bc_train_sequential(data, bcfg, o.seed);

  std::ofstream f = open_out(o.out);
  f << "method,pair_id,success,final_distance,model_calls\n";
  const std::string method_id = o.method == "sgt" ? "sgt_bc" : "seq_bc";
  Rng er = Rng(o.seed).derive(0xEA);
  double succ = 0.0, calls_sum = 0.0;
  for (int pid = 0; pid < o.eval_pairs; ++pid) {
    const auto [a, b] = sample_start_goal(w, er);
    int calls = 0;
    const std::vector<Vec2> traj =
        o.method == "sgt"
            ? bc_predict_sgt(res.model, a, b, o.depth, PredictMode::kMean, nullptr, &calls)
            : bc_rollout_sequential(res.model, a, b, w.goal_threshold, o.step_cap,
                                    PredictMode::kMean, nullptr, &calls);
    const double final_distance = (traj.back() - b).norm();
    const bool ok = final_distance <= w.goal_threshold && trajectory_success(w, traj);
    f << method_id << ',' << pid << ',' << (ok ? 1 : 0) << ',' << final_distance << ',' << calls
      << "\n";
    succ += ok ? 1.0 : 0.0;
    calls_sum += calls;
  }
  append_summary(o.summary, "bc", method_id, o.seed,
                 {{"success_rate", succ / o.eval_pairs},
                  {"mean_model_calls", calls_sum / o.eval_pairs}});
  write_resolved_config(cfg, o.out);
  return kOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportOpts {
  std::vector<std::string> inputs;
  std::string experiment;  // optional filter
  std::string out_md;
  std::string out_json;
};

struct Stats {
  std::vector<double> values;
  double mean() const {
    double s = 0.0;
    for (const double v : values) s += v;
    return s / static_cast<double>(values.size());
  }
  double half_range() const {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return (*hi - *lo) / 2.0;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int run_report(const ReportOpts& o) {
  // experiment -> method -> metric -> per-seed values
  std::map<std::string, std::map<std::string, std::map<std::string, Stats>>> agg;
  for (const std::string& path : o.inputs) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "experiment,method,seed,metric,value")
      throw std::runtime_error("unexpected header in " + path);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::size_t pos = 0;
      for (int c = 0; c < 4; ++c) {
        const std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) throw std::runtime_error("malformed row in " + path);
        cells.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
      }
      cells.push_back(line.substr(pos));
      if (!o.experiment.empty() && cells[0] != o.experiment) continue;
      agg[cells[0]][cells[1]][cells[3]].values.push_back(std::stod(cells[4]));
    }
  }
  if (agg.empty()) {
    std::cerr << "report: no result rows matched (EmptyResults)\n";
    return kConfigError;
  }

  std::string md;
  json out_json{{"experiments", json::object()}};
  for (const auto& [experiment, methods] : agg) {
    std::set<std::string> metric_names;
    for (const auto& [method, metrics] : methods)
      for (const auto& [metric, st] : metrics) metric_names.insert(metric);
    md += "## " + experiment + "\n\n| method |";
    for (const auto& m : metric_names) md += " " + m + " |";
    md += "\n|---|";
    for (std::size_t i = 0; i < metric_names.size(); ++i) md += "---|";
    md += "\n";
    json jexp = json::object();
    for (const auto& [method, metrics] : methods) {
      md += "| " + method + " |";
      json jm = json::object();
      for (const auto& metric : metric_names) {
        const auto it = metrics.find(metric);
        if (it == metrics.end()) {
          md += " - |";
          continue;
        }
        const Stats& st = it->second;
        md += " " + fmt(st.mean()) + " ± " + fmt(st.half_range()) + " |";
        jm[metric] = {{"mean", st.mean()},
                      {"half_range", st.half_range()},
                      {"count", st.values.size()}};
      }
      md += "\n";
      jexp[method] = jm;
    }
    md += "\n";
    out_json["experiments"][experiment] = jexp;
  }
  std::cout << md;
  if (!o.out_md.empty()) open_out(o.out_md) << md;
  if (!o.out_json.empty()) open_out(o.out_json) << out_json.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// wiring

template <typename T>
CLI::Option* opt(CLI::App* sub, const std::string& name, T& var, const std::string& desc) {
  return sub->add_option(name, var, desc)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

// Config-file values become flag tokens injected right after the subcommand
// name, so explicitly passed flags (parsed later, take-last) override them.
std::vector<std::string> inject_config(const std::vector<std::string>& args,
                                       const std::set<std::string>& subcommands) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot open config file: " + config_path);
  const json j = json::parse(in);
  std::vector<std::string> tokens;
  for (const auto& [key, value] : j.items()) {
    tokens.push_back("--" + key);
    tokens.push_back(value.is_string() ? value.get<std::string>() : value.dump());
  }
  std::vector<std::string> out;
  bool injected = false;
  for (const std::string& a : args) {
    out.push_back(a);
    if (!injected && subcommands.count(a)) {
      out.insert(out.end(), tokens.begin(), tokens.end());
      injected = true;
    }
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Sub-goal tree shortest-path and learning experiments"};
  app.require_subcommand(1);
  int threads = 1;
  std::string config_path;
  app.add_option("--threads", threads, "worker threads (outputs are thread-count invariant)")
      ->envname("SGT_LAB_THREADS");
  app.add_option("--config", config_path, "JSON file of flag defaults; explicit flags win");

  ExactOpts ex;
  CLI::App* s_exact = app.add_subcommand("exact", "exact shortest paths on an explicit graph");
  s_exact->fallthrough();
  opt(s_exact, "--graph", ex.graph, "graph JSON file")->required();
  opt(s_exact, "--source", ex.source, "start node id")->required();
  opt(s_exact, "--target", ex.target, "goal node id")->required();
  opt(s_exact, "--method", ex.method, "planner")->check(CLI::IsMember({"sgt", "bellman", "fw"}));
  opt(s_exact, "--dump-tables", ex.dump_tables, "write each value table as a CSV block");

  PerturbOpts pe;
  CLI::App* s_perturb = app.add_subcommand("perturb", "error-propagation studies");
  s_perturb->fallthrough();
  opt(s_perturb, "--n", pe.n, "node count");
  opt(s_perturb, "--eps", pe.eps, "per-entry noise magnitude");
  opt(s_perturb, "--delta", pe.delta, "fig5 self-hop slack (default eps/2)");
  opt(s_perturb, "--trials", pe.trials, "random trials");
  opt(s_perturb, "--family", pe.family, "experiment family")
      ->check(CLI::IsMember({"random", "fig4", "fig5"}));
  opt(s_perturb, "--seed", pe.seed, "root seed");
  opt(s_perturb, "--out", pe.out, "report CSV path");
  opt(s_perturb, "--density", pe.density, "random-graph edge density");
  opt(s_perturb, "--cost-lo", pe.cost_lo, "random-graph minimum edge cost");
  opt(s_perturb, "--cost-hi", pe.cost_hi, "random-graph maximum edge cost");

  FittedOpts fi;
  CLI::App* s_fitted = app.add_subcommand("fitted", "fitted value stacks on a 2-d world");
  s_fitted->fallthrough();
  opt(s_fitted, "--world", fi.world, "builtin world name or world JSON file");
  opt(s_fitted, "--tuples", fi.tuples, "transition dataset size");
  opt(s_fitted, "--depth", fi.depth, "value-stack levels");
  opt(s_fitted, "--cmax", fi.cmax, "saturation cost");
  opt(s_fitted, "--seed", fi.seed, "root seed");
  opt(s_fitted, "--out", fi.out, "per-pair rollout CSV path");
  opt(s_fitted, "--heatmap", fi.heatmap, "per-level value grids toward the fixed goal");
  opt(s_fitted, "--eval-pairs", fi.eval_pairs, "evaluation pair count");
  opt(s_fitted, "--fqi-iters", fi.fqi_iters, "fitted Q-iteration sweeps");
  opt(s_fitted, "--knn", fi.knn, "nearest-neighbor count for all regressors");
  opt(s_fitted, "--grid", fi.grid_res, "search-grid resolution");
  opt(s_fitted, "--goal-x", fi.goal_x, "heatmap goal x");
  opt(s_fitted, "--goal-y", fi.goal_y, "heatmap goal y");
  opt(s_fitted, "--summary", fi.summary, "append aggregate rows to this CSV");

  PgOpts pg;
  CLI::App* s_pg = app.add_subcommand("pg", "policy-gradient subgoal training");
  s_pg->fallthrough();
  opt(s_pg, "--world", pg.world, "builtin world name or world JSON file");
  opt(s_pg, "--depth", pg.depth, "subgoal tree depth (sgt method)");
  opt(s_pg, "--cycles", pg.cycles, "training cycles per depth");
  opt(s_pg, "--seed", pg.seed, "root seed");
  opt(s_pg, "--method", pg.method, "trainer")->check(CLI::IsMember({"sgt", "seq"}));
  opt(s_pg, "--out", pg.out, "training curve CSV path");
  opt(s_pg, "--eval-pairs", pg.eval_pairs, "evaluation pair count");
  opt(s_pg, "--subgoals", pg.subgoals, "subgoal count (seq method)");
  opt(s_pg, "--pairs", pg.pairs, "training pairs per cycle");
  opt(s_pg, "--repeats", pg.repeats, "rollouts per pair");
  opt(s_pg, "--ppo-steps", pg.ppo_steps, "surrogate steps per batch");
  opt(s_pg, "--patience", pg.patience, "cycles without improvement before stopping");
  opt(s_pg, "--policy-out", pg.policy_out, "policy JSON path (default <out>.policy.json)");
  opt(s_pg, "--summary", pg.summary, "append aggregate rows to this CSV");

  BcOpts bc;
  CLI::App* s_bc = app.add_subcommand("bc", "behavioral cloning from expert paths");
  s_bc->fallthrough();
  opt(s_bc, "--world", bc.world, "builtin world name or world JSON file");
  opt(s_bc, "--demos", bc.demos, "expert demonstration count");
  opt(s_bc, "--depth", bc.depth, "prediction tree depth (sgt method)");
  opt(s_bc, "--method", bc.method, "trainer")->check(CLI::IsMember({"sgt", "seq"}));
  opt(s_bc, "--seed", bc.seed, "root seed");
  opt(s_bc, "--out", bc.out, "per-pair results CSV path");
  opt(s_bc, "--demo-cache", bc.demo_cache, "JSON-lines demo cache (loaded when present)");
  opt(s_bc, "--steps", bc.steps, "training steps");
  opt(s_bc, "--batch", bc.batch, "batch size");
  opt(s_bc, "--lr", bc.lr, "learning rate");
  opt(s_bc, "--eval-pairs", bc.eval_pairs, "evaluation pair count");
  opt(s_bc, "--step-cap", bc.step_cap, "sequential rollout step cap");
  opt(s_bc, "--summary", bc.summary, "append aggregate rows to this CSV");

  ReportOpts re;
  CLI::App* s_report = app.add_subcommand("report", "aggregate summary rows over seeds");
  s_report->fallthrough();
  s_report->add_option("--in", re.inputs, "summary CSV files")->required()->expected(-1);
  opt(s_report, "--experiment", re.experiment, "only aggregate this experiment id");
  opt(s_report, "--out", re.out_md, "markdown output path (stdout either way)");
  opt(s_report, "--json", re.out_json, "JSON output path");

  std::vector<std::string> tokens;
  try {
    tokens = inject_config(
        args, std::set<std::string>{"exact", "perturb", "fitted", "pg", "bc", "report"});
  } catch (const std::exception& e) {
    std::cerr << "sgt-lab: " << e.what() << "\n";
    return kConfigError;
  }
  std::vector<const char*> argv{"sgt-lab"};
  for (const std::string& t : tokens) argv.push_back(t.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  // The resolved-config echo restates every setting the run used.
  const auto with_globals = [&](json j) {
    j["threads"] = threads;
    return j;
  };
  try {
    if (app.got_subcommand(s_exact)) return run_exact(ex);
    if (app.got_subcommand(s_perturb))
      return run_perturb(pe, with_globals(json{{"subcommand", "perturb"},
                                               {"n", pe.n},
                                               {"eps", pe.eps},
                                               {"delta", pe.delta},
                                               {"trials", pe.trials},
                                               {"family", pe.family},
                                               {"seed", pe.seed},
                                               {"out", pe.out},
                                               {"density", pe.density},
                                               {"cost-lo", pe.cost_lo},
                                               {"cost-hi", pe.cost_hi}}));
    if (app.got_subcommand(s_fitted))
      return run_fitted(fi, with_globals(json{{"subcommand", "fitted"},
                                              {"world", fi.world},
                                              {"tuples", fi.tuples},
                                              {"depth", fi.depth},
                                              {"cmax", fi.cmax},
                                              {"seed", fi.seed},
                                              {"out", fi.out},
                                              {"heatmap", fi.heatmap},
                                              {"eval-pairs", fi.eval_pairs},
                                              {"fqi-iters", fi.fqi_iters},
                                              {"knn", fi.knn},
                                              {"grid", fi.grid_res},
                                              {"goal-x", fi.goal_x},
                                              {"goal-y", fi.goal_y},
                                              {"summary", fi.summary}}));
    if (app.got_subcommand(s_pg))
      return run_pg(pg, with_globals(json{{"subcommand", "pg"},
                                          {"world", pg.world},
                                          {"depth", pg.depth},
                                          {"cycles", pg.cycles},
                                          {"seed", pg.seed},
                                          {"method", pg.method},
                                          {"out", pg.out},
                                          {"eval-pairs", pg.eval_pairs},
                                          {"subgoals", pg.subgoals},
                                          {"pairs", pg.pairs},
                                          {"repeats", pg.repeats},
                                          {"ppo-steps", pg.ppo_steps},
                                          {"patience", pg.patience},
                                          {"policy-out", pg.policy_out},
                                          {"summary", pg.summary}}));
    if (app.got_subcommand(s_bc))
      return run_bc(bc, with_globals(json{{"subcommand", "bc"},
                                          {"world", bc.world},
                                          {"demos", bc.demos},
                                          {"depth", bc.depth},
                                          {"method", bc.method},
                                          {"seed", bc.seed},
                                          {"out", bc.out},
                                          {"demo-cache", bc.demo_cache},
                                          {"steps", bc.steps},
                                          {"batch", bc.batch},
                                          {"lr", bc.lr},
                                          {"eval-pairs", bc.eval_pairs},
                                          {"step-cap", bc.step_cap},
                                          {"summary", bc.summary}}));
    if (app.got_subcommand(s_report)) return run_report(re);
  } catch (const BoundViolationError& e) {
    std::cerr << "sgt-lab: " << e.what() << "\n";
    return kNumericError;
  } catch (const NonFiniteGradient& e) {
    std::cerr << "sgt-lab: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "sgt-lab: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace sgt::cli

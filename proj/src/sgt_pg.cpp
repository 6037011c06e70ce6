#include "sgt/sgt_pg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace sgt {
namespace {

int pow2(int e) { return 1 << e; }

void check_policies(const std::vector<SubgoalPolicy>& policies, int depth) {
  if (depth < 0) throw IndexOutOfRange("depth must be nonnegative");
  if (static_cast<int>(policies.size()) < depth)
    throw LengthMismatch("need one policy per tree depth");
}

void check_traj(const std::vector<Vec2>& traj, int depth) {
  if (static_cast<int>(traj.size()) != pow2(depth) + 1)
    throw LengthMismatch("trajectory length must be 2^depth + 1");
}

double total_cost(const std::vector<double>& costs) {
  return std::accumulate(costs.begin(), costs.end(), 0.0);
}

}  // namespace

TreeIndices tree_indices(int i, int d, int D) {
  if (d < 1 || d > D) throw IndexOutOfRange("tree_indices: depth out of range");
  if (i < 1 || i > pow2(D - d)) throw IndexOutOfRange("tree_indices: segment out of range");
  return {(i - 1) * pow2(d), (2 * i - 1) * pow2(d - 1), i * pow2(d)};
}

double segment_sum(const std::vector<double>& costs, int i, int d) {
  const int lo = (i - 1) * pow2(d), hi = i * pow2(d);
  if (d < 0 || i < 1 || hi > static_cast<int>(costs.size()))
    throw IndexOutOfRange("segment_sum: segment out of range");
  return std::accumulate(costs.begin() + lo, costs.begin() + hi, 0.0);
}

std::vector<double> leaf_costs(const World2D& w, const std::vector<Vec2>& traj) {
  std::vector<double> costs;
  costs.reserve(traj.size() - 1);
  for (std::size_t t = 0; t + 1 < traj.size(); ++t)
    costs.push_back(segment_cost(w, traj[t], traj[t + 1]));
  return costs;
}

bool trajectory_success(const World2D& w, const std::vector<Vec2>& traj) {
  for (std::size_t t = 0; t + 1 < traj.size(); ++t)
    if (!segment_free(w, traj[t], traj[t + 1])) return false;
  return true;
}

std::vector<Vec2> predict_subgoals(const std::vector<SubgoalPolicy>& policies, const Vec2& s,
                                   const Vec2& g, int depth, PredictMode mode, Rng* rng) {
  check_policies(policies, depth);
  std::vector<Vec2> traj(pow2(depth) + 1);
  traj.front() = s;
  traj.back() = g;
  // Pre-order recursion (root, left, right) fixes the rng consumption order.
  const auto rec = [&](const auto& self, int a, int b, int d) -> void {
    if (d == 0) return;
    const int mid = (a + b) / 2;
    const SubgoalPolicy& pi = policies[d - 1];
    const bool sampled =
        mode == PredictMode::kSample || (mode == PredictMode::kSampleRootOnly && d == depth);
    traj[mid] = sampled ? pi.sample(traj[a], traj[b], *rng) : pi.mean(traj[a], traj[b]);
    self(self, a, mid, d - 1);
    self(self, mid, b, d - 1);
  };
  rec(rec, 0, pow2(depth), depth);
  return traj;
}

double log_likelihood_recursive(const std::vector<SubgoalPolicy>& policies,
                                const std::vector<Vec2>& traj, int depth) {
  check_policies(policies, depth);
  check_traj(traj, depth);
  const auto rec = [&](const auto& self, int a, int b, int d) -> double {
    if (d == 0) return 0.0;
    const int mid = (a + b) / 2;
    return policies[d - 1].log_prob(traj[a], traj[b], traj[mid]) + self(self, a, mid, d - 1) +
           self(self, mid, b, d - 1);
  };
  return rec(rec, 0, pow2(depth), depth);
}

double log_likelihood_flat(const std::vector<SubgoalPolicy>& policies,
                           const std::vector<Vec2>& traj, int depth) {
  check_policies(policies, depth);
  check_traj(traj, depth);
  double lp = 0.0;
  for (int d = 1; d <= depth; ++d) {
    for (int i = 1; i <= pow2(depth - d); ++i) {
      const TreeIndices idx = tree_indices(i, d, depth);
      lp += policies[d - 1].log_prob(traj[idx.start], traj[idx.goal], traj[idx.mid]);
    }
  }
  return lp;
}

Vector pg_gradient(const std::vector<SubgoalPolicy>& policies, const std::vector<Episode>& batch,
                   int d, bool use_baseline) {
  if (batch.empty()) throw EmptyBatch("pg_gradient: empty batch");
  if (d < 1) throw IndexOutOfRange("pg_gradient: depth must be >= 1");
  check_policies(policies, d);
  const SubgoalPolicy& pi = policies[d - 1];
  Vector grad = Vector::Zero(pi.param_count());
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const Episode& ep : batch) {
    check_traj(ep.traj, d);
    if (ep.costs.size() + 1 != ep.traj.size())
      throw LengthMismatch("pg_gradient: costs must cover every segment");
    const double adv = total_cost(ep.costs) - (use_baseline ? ep.baseline : 0.0);
    pi.log_prob_grad(ep.traj.front(), ep.traj.back(), ep.traj[pow2(d - 1)], adv * inv_n, grad);
  }
  return grad;
}

namespace {

// Shared surrogate sweep: accumulates the loss and, when grad is non-null,
// its parameter gradient. The loss is the negated clipped PPO objective for
// costs plus the negated entropy bonus.
double surrogate(const SubgoalPolicy& pi, const std::vector<Decision>& batch,
                 const PpoConfig& cfg, Vector* grad) {
  if (batch.empty()) throw EmptyBatch("ppo surrogate: empty batch");
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const Decision& dec : batch) {
    const double logp = pi.log_prob(dec.s, dec.g, dec.x);
    const double ratio = std::exp(logp - dec.logp_old);
    const double clipped = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
    loss -= std::min(ratio * dec.advantage, clipped * dec.advantage) * inv_n;
    const bool clipped_out = (dec.advantage > 0.0 && ratio > 1.0 + cfg.clip_eps) ||
                             (dec.advantage < 0.0 && ratio < 1.0 - cfg.clip_eps);
    if (grad != nullptr && !clipped_out) {
      pi.log_prob_grad(dec.s, dec.g, dec.x, -dec.advantage * ratio * inv_n, *grad);
    }
    const double ent = grad != nullptr
                           ? pi.entropy_grad(dec.s, dec.g, -cfg.entropy_coeff * inv_n, *grad)
                           : pi.entropy(dec.s, dec.g);
    loss -= cfg.entropy_coeff * ent * inv_n;
  }
  return loss;
}

}  // namespace

double ppo_surrogate_loss(const SubgoalPolicy& pi, const std::vector<Decision>& batch,
                          const PpoConfig& cfg) {
  return surrogate(pi, batch, cfg, nullptr);
}

double ppo_surrogate_step(SubgoalPolicy& pi, const std::vector<Decision>& batch,
                          const PpoConfig& cfg, AdamState& opt) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-8;
  Vector grad = Vector::Zero(pi.param_count());
  const double loss = surrogate(pi, batch, cfg, &grad);
  if (opt.m.size() == 0) {
    opt.m = Vector::Zero(pi.param_count());
    opt.v = Vector::Zero(pi.param_count());
  }
  // A non-finite gradient or update aborts, halves the rate, and retries
  // once before giving up.
  double lr = cfg.lr;
  for (int attempt = 0;; ++attempt) {
    if (grad.allFinite()) {
      if (cfg.grad_clip > 0.0) {
        const double norm = grad.norm();
        if (norm > cfg.grad_clip) grad *= cfg.grad_clip / norm;
      }
      const int t = opt.t + 1;
      Vector m = kBeta1 * opt.m + (1.0 - kBeta1) * grad;
      Vector v = kBeta2 * opt.v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
      const Vector m_hat = m / (1.0 - std::pow(kBeta1, t));
      const Vector v_hat = v / (1.0 - std::pow(kBeta2, t));
      Vector next = pi.params().array() - lr * m_hat.array() / (v_hat.array().sqrt() + kAdamEps);
      if (next.allFinite()) {
        pi.params() = std::move(next);
        opt.m = std::move(m);
        opt.v = std::move(v);
        opt.t = t;
        return loss;
      }
    }
    if (attempt == 1) throw NonFiniteGradient("ppo_surrogate_step: non-finite update");
    lr *= 0.5;
    grad = Vector::Zero(pi.param_count());
    surrogate(pi, batch, cfg, &grad);
  }
}

namespace {

struct CycleStats {
  double mean_cost = 0.0;
  double success_rate = 0.0;
};

CycleStats evaluate_pairs(const World2D& w, const std::vector<std::pair<Vec2, Vec2>>& pairs,
                          const std::function<std::vector<Vec2>(const Vec2&, const Vec2&)>& plan) {
  CycleStats st;
  for (const auto& [s, g] : pairs) {
    const std::vector<Vec2> traj = plan(s, g);
    st.mean_cost += total_cost(leaf_costs(w, traj));
    st.success_rate += trajectory_success(w, traj) ? 1.0 : 0.0;
  }
  st.mean_cost /= static_cast<double>(pairs.size());
  st.success_rate /= static_cast<double>(pairs.size());
  return st;
}

std::vector<std::pair<Vec2, Vec2>> draw_pairs(const World2D& w, int count, Rng rng) {
  std::vector<std::pair<Vec2, Vec2>> pairs;
  pairs.reserve(count);
  for (int i = 0; i < count; ++i) pairs.push_back(sample_start_goal(w, rng));
  return pairs;
}

}  // namespace

TrainResult train_sgt_pg(const World2D& w, const TrainConfig& cfg, std::uint64_t seed) {
  if (cfg.depth < 1) throw IndexOutOfRange("train_sgt_pg: depth must be >= 1");
  const Rng root(seed);
  TrainResult res;
  res.policies.reserve(cfg.depth);
  for (int d = 1; d <= cfg.depth; ++d) {
    Rng init = root.derive(1000 + d);
    res.policies.emplace_back(init.next_u64());
  }
  const auto eval_set = draw_pairs(w, cfg.eval_pairs, root.derive(0xE7A1));
  int global_cycle = 0;
  for (int d = 1; d <= cfg.depth; ++d) {
    if (d > 1) res.policies[d - 1].params() = res.policies[d - 2].params();
    AdamState opt;
    const auto eval_now = [&] {
      return evaluate_pairs(w, eval_set, [&](const Vec2& s, const Vec2& g) {
        return predict_subgoals(res.policies, s, g, d, PredictMode::kMean);
      });
    };
    // The pre-update evaluation seeds the checkpoint, so a depth whose
    // initialization is already optimal cannot end worse than it started.
    const CycleStats init_st = eval_now();
    res.curve.push_back({global_cycle++, d, init_st.mean_cost, init_st.success_rate});
    double best = init_st.mean_cost;
    Vector best_params = res.policies[d - 1].params();
    int stall = 0;
    for (int cycle = 0; cycle < cfg.max_cycles; ++cycle, ++global_cycle) {
      const Rng crng = root.derive(2).derive(global_cycle);
      std::vector<Decision> batch;
      batch.reserve(static_cast<std::size_t>(cfg.pairs_per_cycle) * cfg.repeats);
      for (int p = 0; p < cfg.pairs_per_cycle; ++p) {
        Rng prng = crng.derive(p);
        const auto [s, g] = sample_start_goal(w, prng);
        const std::size_t first = batch.size();
        double cost_sum = 0.0;
        for (int m = 0; m < cfg.repeats; ++m) {
          Rng mrng = prng.derive(100 + m);
          const auto traj =
              predict_subgoals(res.policies, s, g, d, PredictMode::kSampleRootOnly, &mrng);
          const double total = total_cost(leaf_costs(w, traj));
          cost_sum += total;
          Decision dec;
          dec.s = s;
          dec.g = g;
          dec.x = traj[pow2(d - 1)];
          dec.logp_old = res.policies[d - 1].log_prob(s, g, dec.x);
          dec.advantage = -total;  // pair-mean baseline added below
          batch.push_back(dec);
        }
        const double baseline = cost_sum / cfg.repeats;
        for (std::size_t e = first; e < batch.size(); ++e) batch[e].advantage += baseline;
      }
      for (int step = 0; step < cfg.ppo_steps; ++step)
        ppo_surrogate_step(res.policies[d - 1], batch, cfg.ppo, opt);
      const CycleStats st = eval_now();
      res.curve.push_back({global_cycle, d, st.mean_cost, st.success_rate});
      if (st.mean_cost < best) best_params = res.policies[d - 1].params();
      if (st.mean_cost < best * (1.0 - cfg.min_improvement)) {
        best = st.mean_cost;
        stall = 0;
      } else {
        best = std::min(best, st.mean_cost);
        ++stall;
      }
      if (stall >= cfg.patience) {
        ++global_cycle;
        break;
      }
    }
    res.policies[d - 1].params() = std::move(best_params);
  }
  return res;
}

std::vector<Vec2> seq_rollout(const SubgoalPolicy& pi, const Vec2& s, const Vec2& g,
                              int n_subgoals) {
  std::vector<Vec2> traj{s};
  for (int t = 0; t < n_subgoals; ++t) traj.push_back(pi.mean(traj.back(), g));
  traj.push_back(g);
  return traj;
}

TrainResult train_seq_sg(const World2D& w, int n_subgoals, TrainConfig cfg, std::uint64_t seed) {
  if (n_subgoals < 1) throw IndexOutOfRange("train_seq_sg: need at least one sub-goal");
  cfg.ppo.grad_clip = 10.0;
  const Rng root(seed);
  TrainResult res;
  {
    Rng init = root.derive(1001);
    res.policies.emplace_back(init.next_u64());
  }
  SubgoalPolicy& pi = res.policies.front();
  const auto eval_set = draw_pairs(w, cfg.eval_pairs, root.derive(0xE7A1));
  AdamState opt;
  const auto eval_now = [&] {
    return evaluate_pairs(w, eval_set, [&](const Vec2& s, const Vec2& g) {
      return seq_rollout(pi, s, g, n_subgoals);
    });
  };
  const CycleStats init_st = eval_now();
  res.curve.push_back({0, n_subgoals, init_st.mean_cost, init_st.success_rate});
  double best = init_st.mean_cost;
  Vector best_params = pi.params();
  int stall = 0;
  for (int cycle = 1; cycle <= cfg.max_cycles; ++cycle) {
    const Rng crng = root.derive(2).derive(cycle);
    std::vector<Decision> batch;
    batch.reserve(static_cast<std::size_t>(cfg.pairs_per_cycle) * cfg.repeats * n_subgoals);
    for (int p = 0; p < cfg.pairs_per_cycle; ++p) {
      Rng prng = crng.derive(p);
      const auto [s, g] = sample_start_goal(w, prng);
      const std::size_t first = batch.size();
      double cost_sum = 0.0;
      for (int m = 0; m < cfg.repeats; ++m) {
        Rng mrng = prng.derive(100 + m);
        std::vector<Vec2> traj{s};
        for (int t = 0; t < n_subgoals; ++t) {
          const Vec2 cur = traj.back();
          const Vec2 x = pi.sample(cur, g, mrng);
          Decision dec;
          dec.s = cur;
          dec.g = g;
          dec.x = x;
          dec.logp_old = pi.log_prob(cur, g, x);
          batch.push_back(dec);
          traj.push_back(x);
        }
        traj.push_back(g);
        const double total = total_cost(leaf_costs(w, traj));
        cost_sum += total;
        for (std::size_t e = batch.size() - n_subgoals; e < batch.size(); ++e)
          batch[e].advantage = -total;  // baseline added below
      }
      const double baseline = cost_sum / cfg.repeats;
      for (std::size_t e = first; e < batch.size(); ++e) batch[e].advantage += baseline;
    }
    for (int step = 0; step < cfg.ppo_steps; ++step)
      ppo_surrogate_step(pi, batch, cfg.ppo, opt);
    const CycleStats st = eval_now();
    res.curve.push_back({cycle, n_subgoals, st.mean_cost, st.success_rate});
    if (st.mean_cost < best) best_params = pi.params();
    if (st.mean_cost < best * (1.0 - cfg.min_improvement)) {
      best = st.mean_cost;
      stall = 0;
    } else {
      best = std::min(best, st.mean_cost);
      ++stall;
    }
    if (stall >= cfg.patience) break;
  }
  pi.params() = std::move(best_params);
  return res;
}

}  // namespace sgt

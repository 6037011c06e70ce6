#pragma once

#include <cstdint>

#include "sgt/mlp.hpp"
#include "sgt/rng.hpp"
#include "sgt/types.hpp"

namespace sgt {

// Diagonal-Gaussian sub-goal policy over 2-d states. A small tanh network
// maps (s, g) to a mean offset from the segment midpoint and two raw spread
// values; the spread adds a positive floor and a learnable multiple of the
// endpoint distance so long segments keep a wide proposal. Freshly
// initialized parameters (zero biases) predict exactly the midpoint.
class SubgoalPolicy {
 public:
  explicit SubgoalPolicy(std::uint64_t seed);

  int param_count() const { return static_cast<int>(params_.size()); }
  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  struct Dist {
    Vec2 mean;
    Vec2 std;
  };

  Dist dist(const Vec2& s, const Vec2& g) const;
  Vec2 mean(const Vec2& s, const Vec2& g) const { return dist(s, g).mean; }
  Vec2 sample(const Vec2& s, const Vec2& g, Rng& rng) const;

  double log_prob(const Vec2& s, const Vec2& g, const Vec2& x) const;
  // grad += w * d log pi(x | s, g) / d params; returns log pi(x | s, g).
  double log_prob_grad(const Vec2& s, const Vec2& g, const Vec2& x, double w, Vector& grad) const;

  double entropy(const Vec2& s, const Vec2& g) const;
  // grad += w * d H(pi(. | s, g)) / d params; returns the entropy.
  double entropy_grad(const Vec2& s, const Vec2& g, double w, Vector& grad) const;

 private:
  struct Eval {
    Mlp::Workspace ws;
    Vector out;   // [bias_x, bias_y, raw_std_x, raw_std_y]
    Vec2 mean;
    Vec2 std;
    double dist = 0.0;  // ||s - g||
  };

  Eval eval(const Vec2& s, const Vec2& g) const;
  // Routes the (d/d mean, d/d std) adjoints through the network and the two
  // trailing distance-coefficient parameters.
  void backward(const Eval& e, const Vec2& dmean, const Vec2& dstd, double w, Vector& grad) const;

  Mlp net_;
  Vector params_;  // [network parameters, raw distance coefficient x, y]
};

}  // namespace sgt

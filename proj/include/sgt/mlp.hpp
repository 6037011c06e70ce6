#pragma once

#include <vector>

#include "sgt/rng.hpp"
#include "sgt/types.hpp"

namespace sgt {

// Fixed-shape feed-forward network with tanh hidden layers and a linear
// output. All parameters live in one flat vector laid out layer by layer as
// [W row-major, b], so optimizers and finite-difference checks can treat the
// whole network as a single real vector.
class Mlp {
 public:
  explicit Mlp(std::vector<int> layer_sizes);

  int param_count() const { return param_count_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }

  // Weights uniform in +/-weight_range, biases exactly zero, so the initial
  // output is zero for every input.
  Vector init_params(Rng& rng, double weight_range = 0.05) const;

  // Per-layer activations cached by forward for the reverse sweep.
  struct Workspace {
    std::vector<Vector> acts;  // acts[0] = input, acts.back() = output
  };

  Vector forward(const Vector& params, const Vector& x, Workspace& ws) const;

  // grad += d(dy . output)/d(params); dy is the adjoint of the output.
  void backward(const Vector& params, const Workspace& ws, const Vector& dy, Vector& grad) const;

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;  // flat offset of each layer's [W, b] block
  int param_count_ = 0;
};

}  // namespace sgt

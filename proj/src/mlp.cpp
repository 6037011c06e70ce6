#include "sgt/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace sgt {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
  for (int s : sizes_) {
    if (s <= 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
  }
  offsets_.resize(sizes_.size() - 1);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_[l] = param_count_;
    param_count_ += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
}

Vector Mlp::init_params(Rng& rng, double weight_range) const {
  Vector p = Vector::Zero(param_count_);
  // Hidden weights are small and uniform; biases and the output layer stay
  // zero so a freshly initialized network maps every input to exactly zero.
  for (std::size_t l = 0; l + 2 < sizes_.size(); ++l) {
    const int rows = sizes_[l + 1], cols = sizes_[l];
    double* w = p.data() + offsets_[l];
    for (int i = 0; i < rows * cols; ++i) w[i] = rng.uniform(-weight_range, weight_range);
  }
  return p;
}

Vector Mlp::forward(const Vector& params, const Vector& x, Workspace& ws) const {
  if (x.size() != sizes_.front()) throw std::invalid_argument("Mlp: input size mismatch");
  ws.acts.assign(sizes_.size(), Vector());
  ws.acts[0] = x;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int rows = sizes_[l + 1], cols = sizes_[l];
    Eigen::Map<const RowMajorMatrix> W(params.data() + offsets_[l], rows, cols);
    Eigen::Map<const Vector> b(params.data() + offsets_[l] + rows * cols, rows);
    Vector z = W * ws.acts[l] + b;
    if (l + 2 < sizes_.size()) z = z.array().tanh();
    ws.acts[l + 1] = std::move(z);
  }
  return ws.acts.back();
}

void Mlp::backward(const Vector& params, const Workspace& ws, const Vector& dy,
                   Vector& grad) const {
  if (grad.size() != param_count_) throw std::invalid_argument("Mlp: gradient size mismatch");
  Vector dz = dy;  // adjoint of the linear output
  for (std::size_t l = sizes_.size() - 1; l-- > 0;) {
    const int rows = sizes_[l + 1], cols = sizes_[l];
    // tanh'(z) expressed through the stored activation a = tanh(z).
    if (l + 2 < sizes_.size()) {
      dz.array() *= 1.0 - ws.acts[l + 1].array().square();
    }
    Eigen::Map<RowMajorMatrix> dW(grad.data() + offsets_[l], rows, cols);
    Eigen::Map<Vector> db(grad.data() + offsets_[l] + rows * cols, rows);
    dW += dz * ws.acts[l].transpose();
    db += dz;
    if (l > 0) {
      Eigen::Map<const RowMajorMatrix> W(params.data() + offsets_[l], rows, cols);
      dz = W.transpose() * dz;
    }
  }
}

}  // namespace sgt

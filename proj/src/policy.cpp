#include "sgt/policy.hpp"

#include <cmath>

namespace sgt {
namespace {

constexpr double kStdFloor = 0.05;
// Raw spread outputs are shifted down before the softened-positive map so a
// zero-output network starts near std 0.13 + 0.05 instead of log(2) + 0.05,
// which would swamp the unit square.
constexpr double kStdShift = -2.0;
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

SubgoalPolicy::SubgoalPolicy(std::uint64_t seed) : net_({4, 20, 20, 20, 4}) {
  Rng rng(seed);
  const Vector net_params = net_.init_params(rng);
  params_ = Vector::Zero(net_.param_count() + 2);
  params_.head(net_.param_count()) = net_params;
  // The raw distance coefficients start at zero: softplus(-2) ~= 0.13.
}

SubgoalPolicy::Eval SubgoalPolicy::eval(const Vec2& s, const Vec2& g) const {
  Eval e;
  Vector x(4);
  x << s.x(), s.y(), g.x(), g.y();
  e.out = net_.forward(params_.head(net_.param_count()), x, e.ws);
  e.dist = (s - g).norm();
  e.mean = 0.5 * (s + g) + Vec2(e.out[0], e.out[1]);
  for (int i = 0; i < 2; ++i) {
    const double raw_dist = params_[net_.param_count() + i];
    e.std[i] = softplus(e.out[2 + i] + kStdShift) + kStdFloor +
               softplus(raw_dist + kStdShift) * e.dist;
  }
  return e;
}

void SubgoalPolicy::backward(const Eval& e, const Vec2& dmean, const Vec2& dstd, double w,
                             Vector& grad) const {
  Vector dout(4);
  for (int i = 0; i < 2; ++i) {
    dout[i] = w * dmean[i];
    dout[2 + i] = w * dstd[i] * sigmoid(e.out[2 + i] + kStdShift);
    const double raw_dist = params_[net_.param_count() + i];
    grad[net_.param_count() + i] += w * dstd[i] * sigmoid(raw_dist + kStdShift) * e.dist;
  }
  auto head = grad.head(net_.param_count());
  Vector net_grad = Vector::Zero(net_.param_count());
  net_.backward(params_.head(net_.param_count()), e.ws, dout, net_grad);
  head += net_grad;
}

SubgoalPolicy::Dist SubgoalPolicy::dist(const Vec2& s, const Vec2& g) const {
  const Eval e = eval(s, g);
  return {e.mean, e.std};
}

Vec2 SubgoalPolicy::sample(const Vec2& s, const Vec2& g, Rng& rng) const {
  const Eval e = eval(s, g);
  return {e.mean.x() + e.std.x() * rng.normal(), e.mean.y() + e.std.y() * rng.normal()};
}

double SubgoalPolicy::log_prob(const Vec2& s, const Vec2& g, const Vec2& x) const {
  const Eval e = eval(s, g);
  double lp = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double z = (x[i] - e.mean[i]) / e.std[i];
    lp += -0.5 * z * z - std::log(e.std[i]) - 0.5 * kLog2Pi;
  }
  return lp;
}

double SubgoalPolicy::log_prob_grad(const Vec2& s, const Vec2& g, const Vec2& x, double w,
                                    Vector& grad) const {
  const Eval e = eval(s, g);
  double lp = 0.0;
  Vec2 dmean, dstd;
  for (int i = 0; i < 2; ++i) {
    const double z = (x[i] - e.mean[i]) / e.std[i];
    lp += -0.5 * z * z - std::log(e.std[i]) - 0.5 * kLog2Pi;
    dmean[i] = z / e.std[i];
    dstd[i] = (z * z - 1.0) / e.std[i];
  }
  backward(e, dmean, dstd, w, grad);
  return lp;
}

double SubgoalPolicy::entropy(const Vec2& s, const Vec2& g) const {
  const Eval e = eval(s, g);
  return 1.0 + kLog2Pi + std::log(e.std[0]) + std::log(e.std[1]);
}

double SubgoalPolicy::entropy_grad(const Vec2& s, const Vec2& g, double w, Vector& grad) const {
  const Eval e = eval(s, g);
  backward(e, Vec2::Zero(), Vec2(1.0 / e.std[0], 1.0 / e.std[1]), w, grad);
  return 1.0 + kLog2Pi + std::log(e.std[0]) + std::log(e.std[1]);
}

}  // namespace sgt

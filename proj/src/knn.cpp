#include "sgt/knn.hpp"

#include <algorithm>
#include <cmath>

namespace sgt {
namespace {

constexpr int kLeafSize = 16;

// Lexicographic (squared distance, index) insertion into a sorted k-best
// list. Returns the current pruning radius (worst kept distance).
inline void consider(std::vector<std::pair<double, int>>& best, int k, double d2, int idx) {
  if (static_cast<int>(best.size()) == k) {
    const auto& worst = best.back();
    if (d2 > worst.first || (d2 == worst.first && idx > worst.second)) return;
    best.pop_back();
  }
  std::pair<double, int> cand{d2, idx};
  auto pos = std::upper_bound(best.begin(), best.end(), cand);
  best.insert(pos, cand);
}

}  // namespace

KdTree::KdTree(const Matrix& points) {
  n_ = static_cast<int>(points.rows());
  d_ = static_cast<int>(points.cols());
  if (n_ == 0) throw EmptyDataError("KdTree: no points");
  std::vector<int> order(n_);
  for (int i = 0; i < n_; ++i) order[i] = i;
  pts_.resize(static_cast<std::size_t>(n_) * d_);
  orig_.resize(n_);
  // Fill pts_ lazily after the recursive build settles the permutation: the
  // build works on `order`, then rows are copied leaf-contiguous.
  build_src_ = &points;
  root_ = build(order, 0, n_);
  build_src_ = nullptr;
}

int KdTree::build(std::vector<int>& order, int begin, int end) {
  const Matrix& src = *build_src_;
  Node node;
  node.begin = begin;
  node.end = end;
  if (end - begin <= kLeafSize) {
    for (int i = begin; i < end; ++i) {
      orig_[i] = order[i];
      for (int c = 0; c < d_; ++c) pts_[static_cast<std::size_t>(i) * d_ + c] = src(order[i], c);
    }
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }
  // Split on the widest dimension at the median.
  int dim = 0;
  double best_spread = -1.0;
  for (int c = 0; c < d_; ++c) {
    double lo = src(order[begin], c), hi = lo;
    for (int i = begin + 1; i < end; ++i) {
      const double v = src(order[i], c);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      dim = c;
    }
  }
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                   [&](int a, int b) {
                     if (src(a, dim) != src(b, dim)) return src(a, dim) < src(b, dim);
                     return a < b;
                   });
  node.dim = dim;
  node.split = src(order[mid], dim);
  const int self = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  const int left = build(order, begin, mid);
  const int right = build(order, mid, end);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree::search(int node_id, const double* query, int k,
                    std::vector<std::pair<double, int>>& best) const {
  const Node& node = nodes_[node_id];
  if (node.dim < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const double* p = &pts_[static_cast<std::size_t>(i) * d_];
      double d2 = 0.0;
      for (int c = 0; c < d_; ++c) {
        const double diff = p[c] - query[c];
        d2 += diff * diff;
      }
      consider(best, k, d2, orig_[i]);
    }
    return;
  }
  const double diff = query[node.dim] - node.split;
  const int near = diff < 0.0 ? node.left : node.right;
  const int far = diff < 0.0 ? node.right : node.left;
  search(near, query, k, best);
  // Non-strict bound: equal-distance points must still be visited so that
  // index tie-breaking is exact.
  if (static_cast<int>(best.size()) < k || diff * diff <= best.back().first) {
    search(far, query, k, best);
  }
}

void KdTree::knn(const double* query, int k, std::vector<std::pair<double, int>>& out) const {
  k = std::min(k, n_);
  out.clear();
  out.reserve(k);
  search(root_, query, k, out);
}

KnnRegressor::KnnRegressor(Matrix points, Vector targets, int k)
    : points_(std::move(points)), targets_(std::move(targets)), k_(k), tree_(points_) {
  if (points_.rows() != targets_.size()) {
    throw std::invalid_argument("KnnRegressor: points/targets size mismatch");
  }
  if (k_ < 1) throw std::invalid_argument("KnnRegressor: k must be positive");
}

double KnnRegressor::predict(const double* query) const {
  tree_.knn(query, k_, scratch_);
  double sum = 0.0;
  for (const auto& [d2, idx] : scratch_) sum += targets_[idx];
  return sum / static_cast<double>(scratch_.size());
}

KnnRegressor knn_fit(const std::vector<std::pair<Vector, double>>& data, int k) {
  if (data.empty()) throw EmptyDataError("knn_fit: empty dataset");
  const int d = static_cast<int>(data[0].first.size());
  Matrix pts(static_cast<int>(data.size()), d);
  Vector t(static_cast<int>(data.size()));
  for (int i = 0; i < static_cast<int>(data.size()); ++i) {
    pts.row(i) = data[i].first.transpose();
    t[i] = data[i].second;
  }
  return KnnRegressor(std::move(pts), std::move(t), k);
}

KnnClassifier::KnnClassifier(Matrix points, std::vector<int> labels, int k, int num_classes)
    : points_(std::move(points)),
      labels_(std::move(labels)),
      k_(k),
      num_classes_(num_classes),
      tree_(points_) {
  if (points_.rows() != static_cast<Eigen::Index>(labels_.size())) {
    throw std::invalid_argument("KnnClassifier: points/labels size mismatch");
  }
  if (k_ < 1) throw std::invalid_argument("KnnClassifier: k must be positive");
  if (num_classes_ < 1) throw std::invalid_argument("KnnClassifier: need at least one class");
  for (int label : labels_) {
    if (label < 0 || label >= num_classes_) {
      throw std::invalid_argument("KnnClassifier: label out of range");
    }
  }
}

int KnnClassifier::predict(const double* query) const {
  tree_.knn(query, k_, scratch_);
  std::vector<int> votes(num_classes_, 0);
  for (const auto& [d2, idx] : scratch_) ++votes[labels_[idx]];
  int best = 0;
  for (int c = 1; c < num_classes_; ++c) {
    if (votes[c] > votes[best]) best = c;  // ties keep the smaller label
  }
  return best;
}

}  // namespace sgt

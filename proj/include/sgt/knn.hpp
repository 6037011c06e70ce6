#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "sgt/types.hpp"

namespace sgt {

struct EmptyDataError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Exact k-nearest-neighbor search over n points in d dimensions. Neighbor
// order is lexicographic on (squared distance, insertion index), which makes
// every downstream prediction deterministic even under exact distance ties.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(const Matrix& points);  // n x d

  // Returns the k nearest (squared distance, original index) pairs in
  // ascending lexicographic order; k is clamped to n.
  void knn(const double* query, int k, std::vector<std::pair<double, int>>& out) const;

  int size() const { return n_; }
  int dim() const { return d_; }

 private:
  struct Node {
    double split = 0.0;
    int dim = -1;       // -1 marks a leaf
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf point range
  };

  int build(std::vector<int>& order, int begin, int end);
  void search(int node, const double* query, int k,
              std::vector<std::pair<double, int>>& best) const;

  int n_ = 0, d_ = 0;
  std::vector<double> pts_;   // leaf-contiguous, row-major
  std::vector<int> orig_;     // original index per stored row
  std::vector<Node> nodes_;
  int root_ = -1;
  const Matrix* build_src_ = nullptr;  // alive only during construction
};

// Mean-of-k-nearest regressor (k clamped to the dataset size).
class KnnRegressor {
 public:
  KnnRegressor() = default;
  KnnRegressor(Matrix points, Vector targets, int k);

  double predict(const double* query) const;
  double predict(const Vector& query) const { return predict(query.data()); }

  const Matrix& points() const { return points_; }
  const Vector& targets() const { return targets_; }
  int k() const { return k_; }

 private:
  Matrix points_;
  Vector targets_;
  int k_ = 1;
  KdTree tree_;
  mutable std::vector<std::pair<double, int>> scratch_;
};

KnnRegressor knn_fit(const std::vector<std::pair<Vector, double>>& data, int k);

// Majority vote over the k nearest labels; vote ties go to the smallest
// label id.
class KnnClassifier {
 public:
  KnnClassifier() = default;
  KnnClassifier(Matrix points, std::vector<int> labels, int k, int num_classes);

  int predict(const double* query) const;
  int predict(const Vector& query) const { return predict(query.data()); }

 private:
  Matrix points_;
  std::vector<int> labels_;
  int k_ = 1;
  int num_classes_ = 0;
  KdTree tree_;
  mutable std::vector<std::pair<double, int>> scratch_;
};

}  // namespace sgt

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dndf/tensor.hpp"

namespace dndf {

using Labels = std::vector<int>;

/// Full-batch gradient descent on BCE; P = exp(z) / (1 + exp(z)) with
/// z = intercept + w . x.
struct LogisticRegression {
  double learning_rate = 0.1;
  int iterations = 1000;

  double intercept = 0.0;
  std::vector<double> weights;

  void fit(const Tensor& X, const Labels& y);
  std::vector<double> predict_proba(const Tensor& X) const;
  Labels predict(const Tensor& X) const;  // P >= 0.5 -> class 1
};

/// Per-class Gaussian densities with independent features; variances floored
/// at 1e-9. Argmax ties go to class 0.
struct GaussianNb {
  std::array<double, 2> log_prior{};
  std::array<std::vector<double>, 2> mean;
  std::array<std::vector<double>, 2> variance;

  void fit(const Tensor& X, const Labels& y);
  Labels predict(const Tensor& X) const;
};

/// Euclidean-distance majority vote; k = min(5, n_train). A vote tie falls
/// back to the class of the single nearest neighbor.
struct Knn {
  int k = 5;

  Tensor train_X;
  Labels train_y;

  void fit(const Tensor& X, const Labels& y);
  Labels predict(const Tensor& X) const;
};

/// CART with Gini impurity. Thresholds sit at midpoints of sorted distinct
/// feature values; rows with value < threshold go left. Best split ties break
/// to the lowest feature index, then the lowest threshold. Grows until nodes
/// are pure or have fewer than 2 rows; no depth cap. Leaf label is the
/// majority class (tie -> class 1).
struct CartTree {
  struct Node {
    bool leaf = true;
    int label = 0;
    std::size_t feature = 0;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
  };
  std::vector<Node> nodes;

  void fit(const Tensor& X, const Labels& y);
  /// Restricts each split to `max_features` seeded candidate features.
  void fit_subsampled(const Tensor& X, const Labels& y, int max_features, std::uint64_t seed);
  Labels predict(const Tensor& X) const;
  int predict_row(const Tensor& X, std::size_t row) const;
};

/// Bagged CART trees with per-split feature subsampling; majority vote with
/// ties going to class 1.
struct RandomForest {
  int num_trees = 100;
  bool bootstrap = true;
  int max_features = 0;  // 0 -> ceil(sqrt(n_features))
  std::uint64_t seed = 0;

  std::vector<CartTree> trees;

  void fit(const Tensor& X, const Labels& y);
  Labels predict(const Tensor& X) const;
};

/// Depth-1 stumps on reweighted samples; stage weight 0.5 ln((1 - e) / e)
/// with the error floored at 1e-10. Boosting halts early on a stump with
/// error >= 0.5 or a perfect stump.
struct AdaBoost {
  struct Stump {
    std::size_t feature = 0;
    double threshold = 0.0;
    int polarity = 1;  // +1: value < threshold predicts class 1

    int classify(const Tensor& X, std::size_t row) const;
  };

  int rounds = 50;

  std::vector<Stump> stumps;
  std::vector<double> alphas;

  void fit(const Tensor& X, const Labels& y);
  Labels predict(const Tensor& X) const;  // sign of sum; 0 -> class 1
};

/// Linear SVM trained with the Pegasos hinge-loss subgradient schedule.
struct LinearSvm {
  double lambda = 1e-4;
  int epochs = 100;
  std::uint64_t seed = 0;

  std::vector<double> weights;
  double bias = 0.0;

  void fit(const Tensor& X, const Labels& y);
  Labels predict(const Tensor& X) const;  // sign; 0 -> class 1
};

}  // namespace dndf

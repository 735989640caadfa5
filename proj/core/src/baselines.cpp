#include "dndf/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dndf/rng.hpp"

namespace dndf {

namespace {

void require_labels(const Tensor& X, const Labels& y, const char* who) {
  if (X.rank() != 2) throw ShapeError(std::string(who) + ": X must be rank 2");
  if (X.rows() != y.size()) {
    throw ShapeError(std::string(who) + ": " + std::to_string(X.rows()) + " rows vs " +
                     std::to_string(y.size()) + " labels");
  }
  for (int v : y) {
    if (v != 0 && v != 1) throw ValidationError(std::string(who) + ": labels must be 0/1");
  }
}

void require_two_classes(const Labels& y, const char* who) {
  const bool has0 = std::find(y.begin(), y.end(), 0) != y.end();
  const bool has1 = std::find(y.begin(), y.end(), 1) != y.end();
  if (!has0 || !has1) {
    throw ValidationError(std::string(who) + ": training data contains a single class");
  }
}

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double gini(std::size_t c0, std::size_t c1) {
  const double n = static_cast<double>(c0 + c1);
  if (n == 0.0) return 0.0;
  const double p0 = c0 / n, p1 = c1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

int majority_label(const Labels& y, const std::vector<std::size_t>& rows) {
  std::size_t c1 = 0;
  for (std::size_t r : rows) c1 += static_cast<std::size_t>(y[r]);
  const std::size_t c0 = rows.size() - c1;
  return c1 >= c0 ? 1 : 0;
}

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = std::numeric_limits<double>::infinity();
};

/// Best Gini split over the given candidate features; first-found wins ties
/// because candidates and thresholds are scanned in ascending order.
SplitChoice best_gini_split(const Tensor& X, const Labels& y,
                            const std::vector<std::size_t>& rows,
                            const std::vector<std::size_t>& features) {
  SplitChoice best;
  std::vector<std::pair<double, int>> vals;
  for (std::size_t f : features) {
    vals.clear();
    vals.reserve(rows.size());
    for (std::size_t r : rows) vals.emplace_back(X.at(r, f), y[r]);
    std::sort(vals.begin(), vals.end());
    std::size_t left0 = 0, left1 = 0;
    std::size_t total1 = 0;
    for (const auto& [v, lab] : vals) total1 += static_cast<std::size_t>(lab);
    const std::size_t total0 = vals.size() - total1;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      left0 += vals[i].second == 0;
      left1 += vals[i].second == 1;
      if (vals[i].first == vals[i + 1].first) continue;
      const double thr = 0.5 * (vals[i].first + vals[i + 1].first);
      const std::size_t nl = i + 1, nr = vals.size() - nl;
      const double imp = (nl * gini(left0, left1) + nr * gini(total0 - left0, total1 - left1)) /
                         static_cast<double>(vals.size());
      if (imp < best.impurity) {
        best = {true, f, thr, imp};
      }
    }
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Logistic regression

void LogisticRegression::fit(const Tensor& X, const Labels& y) {
  require_labels(X, y, "LogisticRegression::fit");
  require_two_classes(y, "LogisticRegression::fit");
  const std::size_t n = X.rows(), d = X.cols();
  intercept = 0.0;
  weights.assign(d, 0.0);
  std::vector<double> grad(d);
  for (int it = 0; it < iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = intercept;
      for (std::size_t j = 0; j < d; ++j) z += weights[j] * X.at(i, j);
      const double err = sigmoid(z) - y[i];
      grad0 += err;
      for (std::size_t j = 0; j < d; ++j) grad[j] += err * X.at(i, j);
    }
    intercept -= learning_rate * grad0 / static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) {
      weights[j] -= learning_rate * grad[j] / static_cast<double>(n);
    }
  }
}

std::vector<double> LogisticRegression::predict_proba(const Tensor& X) const {
  if (X.cols() != weights.size()) {
    throw ShapeError("LogisticRegression::predict: feature count mismatch");
  }
  std::vector<double> p(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double z = intercept;
    for (std::size_t j = 0; j < X.cols(); ++j) z += weights[j] * X.at(i, j);
    p[i] = sigmoid(z);
  }
  return p;
}

Labels LogisticRegression::predict(const Tensor& X) const {
  const auto p = predict_proba(X);
  Labels out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] >= 0.5 ? 1 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes

void GaussianNb::fit(const Tensor& X, const Labels& y) {
  require_labels(X, y, "GaussianNb::fit");
  require_two_classes(y, "GaussianNb::fit");
  const std::size_t n = X.rows(), d = X.cols();
  std::array<std::size_t, 2> counts{};
  for (int c = 0; c < 2; ++c) {
    mean[c].assign(d, 0.0);
    variance[c].assign(d, 0.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int c = y[i];
    counts[c] += 1;
    for (std::size_t j = 0; j < d; ++j) mean[c][j] += X.at(i, j);
  }
  for (int c = 0; c < 2; ++c) {
    for (std::size_t j = 0; j < d; ++j) mean[c][j] /= static_cast<double>(counts[c]);
    log_prior[c] = std::log(static_cast<double>(counts[c]) / static_cast<double>(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int c = y[i];
    for (std::size_t j = 0; j < d; ++j) {
      const double dlt = X.at(i, j) - mean[c][j];
      variance[c][j] += dlt * dlt;
    }
  }
  for (int c = 0; c < 2; ++c) {
    for (std::size_t j = 0; j < d; ++j) {
      variance[c][j] = std::max(variance[c][j] / static_cast<double>(counts[c]), 1e-9);
    }
  }
}

Labels GaussianNb::predict(const Tensor& X) const {
  if (X.cols() != mean[0].size()) throw ShapeError("GaussianNb::predict: feature count mismatch");
  Labels out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double score[2];
    for (int c = 0; c < 2; ++c) {
      double s = log_prior[c];
      for (std::size_t j = 0; j < X.cols(); ++j) {
        const double dlt = X.at(i, j) - mean[c][j];
        s += -0.5 * std::log(2.0 * M_PI * variance[c][j]) - dlt * dlt / (2.0 * variance[c][j]);
      }
      score[c] = s;
    }
    out[i] = score[1] > score[0] ? 1 : 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// KNN

void Knn::fit(const Tensor& X, const Labels& y) {
  require_labels(X, y, "Knn::fit");
  if (X.rows() == 0) throw ValidationError("Knn::fit: empty training data");
  train_X = X;
  train_y = y;
}

Labels Knn::predict(const Tensor& X) const {
  if (train_y.empty()) throw ValidationError("Knn::predict: model not fitted");
  if (X.cols() != train_X.cols()) throw ShapeError("Knn::predict: feature count mismatch");
  const std::size_t n = train_X.rows();
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n);
  Labels out(X.rows());
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < X.cols(); ++j) {
        const double d = X.at(i, j) - train_X.at(r, j);
        s += d * d;
      }
      dist[r] = {s, r};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    std::size_t votes1 = 0;
    for (std::size_t m = 0; m < kk; ++m) votes1 += static_cast<std::size_t>(train_y[dist[m].second]);
    const std::size_t votes0 = kk - votes1;
    if (votes1 > votes0) out[i] = 1;
    else if (votes0 > votes1) out[i] = 0;
    else out[i] = train_y[dist[0].second];
  }
  return out;
}

// ---------------------------------------------------------------------------
// CART

namespace {

struct CartBuilder {
  const Tensor& X;
  const Labels& y;
  std::vector<CartTree::Node>& nodes;
  int max_features;  // <= 0: all features
  Rng* rng;          // only when subsampling

  int build(const std::vector<std::size_t>& rows) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[static_cast<std::size_t>(id)].label = majority_label(y, rows);

    std::size_t c1 = 0;
    for (std::size_t r : rows) c1 += static_cast<std::size_t>(y[r]);
    if (rows.size() < 2 || c1 == 0 || c1 == rows.size()) return id;

    std::vector<std::size_t> features;
    if (max_features > 0 && static_cast<std::size_t>(max_features) < X.cols()) {
      features = rng->sample_without_replacement(X.cols(), static_cast<std::size_t>(max_features));
      std::sort(features.begin(), features.end());
    } else {
      features.resize(X.cols());
      std::iota(features.begin(), features.end(), std::size_t{0});
    }

    const SplitChoice split = best_gini_split(X, y, rows, features);
    if (!split.found) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (X.at(r, split.feature) < split.threshold ? left : right).push_back(r);
    }
    if (left.empty() || right.empty()) return id;

    const int l = build(left);
    const int r = build(right);
    CartTree::Node& node = nodes[static_cast<std::size_t>(id)];
    node.leaf = false;
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }
};

}  // namespace

void CartTree::fit(const Tensor& X, const Labels& y) {
  require_labels(X, y, "CartTree::fit");
  if (X.rows() == 0) throw ValidationError("CartTree::fit: empty training data");
  nodes.clear();
  std::vector<std::size_t> rows(X.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  CartBuilder{X, y, nodes, 0, nullptr}.build(rows);
}

void CartTree::fit_subsampled(const Tensor& X, const Labels& y, int max_features,
                              std::uint64_t seed) {
  require_labels(X, y, "CartTree::fit");
  if (X.rows() == 0) throw ValidationError("CartTree::fit: empty training data");
  nodes.clear();
  std::vector<std::size_t> rows(X.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng(seed);
  CartBuilder{X, y, nodes, max_features, &rng}.build(rows);
}

int CartTree::predict_row(const Tensor& X, std::size_t row) const {
  if (nodes.empty()) throw ValidationError("CartTree::predict: model not fitted");
  std::size_t cur = 0;
  while (!nodes[cur].leaf) {
    cur = static_cast<std::size_t>(X.at(row, nodes[cur].feature) < nodes[cur].threshold
                                       ? nodes[cur].left
                                       : nodes[cur].right);
  }
  return nodes[cur].label;
}

Labels CartTree::predict(const Tensor& X) const {
  Labels out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict_row(X, i);
  return out;
}

// ---------------------------------------------------------------------------
// Random forest

void RandomForest::fit(const Tensor& X, const Labels& y) {
  require_labels(X, y, "RandomForest::fit");
  if (X.rows() == 0) throw ValidationError("RandomForest::fit: empty training data");
  const int m = max_features > 0
                    ? max_features
                    : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(X.cols()))));
  trees.assign(static_cast<std::size_t>(num_trees), CartTree{});
  for (int t = 0; t < num_trees; ++t) {
    const std::uint64_t tree_seed = mix_seed(seed, static_cast<std::uint64_t>(t));
    if (bootstrap) {
      Rng rng(mix_seed(tree_seed, 0xb007ULL));
      Tensor Xb = Tensor::zeros({X.rows(), X.cols()});
      Labels yb(X.rows());
      for (std::size_t i = 0; i < X.rows(); ++i) {
        const std::size_t r = rng.index(X.rows());
        for (std::size_t j = 0; j < X.cols(); ++j) Xb.at(i, j) = X.at(r, j);
        yb[i] = y[r];
      }
      trees[static_cast<std::size_t>(t)].fit_subsampled(Xb, yb, m, tree_seed);
    } else {
      trees[static_cast<std::size_t>(t)].fit_subsampled(X, y, m, tree_seed);
    }
  }
}

Labels RandomForest::predict(const Tensor& X) const {
  if (trees.empty()) throw ValidationError("RandomForest::predict: model not fitted");
  Labels out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    std::size_t votes1 = 0;
    for (const auto& tree : trees) votes1 += static_cast<std::size_t>(tree.predict_row(X, i));
    out[i] = 2 * votes1 >= trees.size() ? 1 : 0;  // tie -> class 1
  }
  return out;
}

// ---------------------------------------------------------------------------
// AdaBoost

int AdaBoost::Stump::classify(const Tensor& X, std::size_t row) const {
  const int raw = X.at(row, feature) < threshold ? 1 : -1;
  return raw * polarity;
}

void AdaBoost::fit(const Tensor& X, const Labels& y) {
  require_labels(X, y, "AdaBoost::fit");
  if (X.rows() == 0) throw ValidationError("AdaBoost::fit: empty training data");
  const std::size_t n = X.rows(), d = X.cols();
  stumps.clear();
  alphas.clear();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<int> ypm(n);
  for (std::size_t i = 0; i < n; ++i) ypm[i] = y[i] == 1 ? 1 : -1;

  for (int round = 0; round < rounds; ++round) {
    Stump best;
    double best_err = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, std::size_t>> vals(n);
    for (std::size_t f = 0; f < d; ++f) {
      for (std::size_t i = 0; i < n; ++i) vals[i] = {X.at(i, f), i};
      std::sort(vals.begin(), vals.end());
      // err(+1 polarity) = sum of weights misclassified when "< thr -> +1".
      // Sweep thresholds between distinct values, maintaining the error of
      // the all-right split incrementally.
      double err_plus = 0.0;  // threshold below all values: everything -> -1
      for (std::size_t i = 0; i < n; ++i) {
        if (ypm[i] == 1) err_plus += w[i];
      }
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t r = vals[i].second;
        // vals[i] moves to the left side (predicted +1 by +1 polarity).
        err_plus += ypm[r] == 1 ? -w[r] : w[r];
        if (vals[i].first == vals[i + 1].first) continue;
        const double thr = 0.5 * (vals[i].first + vals[i + 1].first);
        const double candidates[2] = {err_plus, 1.0 - err_plus};
        for (int pol = 0; pol < 2; ++pol) {
          if (candidates[pol] < best_err) {
            best_err = candidates[pol];
            best = {f, thr, pol == 0 ? 1 : -1};
          }
        }
      }
    }
    if (!std::isfinite(best_err) || best_err >= 0.5) break;
    const double eps = std::max(best_err, 1e-10);
    const double alpha = 0.5 * std::log((1.0 - eps) / eps);
    stumps.push_back(best);
    alphas.push_back(alpha);
    if (best_err <= 0.0) break;  // perfect stump, capped alpha already stored
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int h = best.classify(X, i);
      w[i] *= std::exp(-alpha * ypm[i] * h);
      total += w[i];
    }
    for (double& wi : w) wi /= total;
  }
  if (stumps.empty()) {
    // No usable stump (e.g. constant features): fall back to the majority
    // class as a single degenerate vote.
    const int maj = 2 * std::count(y.begin(), y.end(), 1) >= static_cast<long>(n) ? 1 : -1;
    // The threshold is below every value, so the raw vote is always -1;
    // polarity -maj turns that into the majority class.
    stumps.push_back({0, std::numeric_limits<double>::lowest(), -maj});
    alphas.push_back(1.0);
  }
}

Labels AdaBoost::predict(const Tensor& X) const {
  if (stumps.empty()) throw ValidationError("AdaBoost::predict: model not fitted");
  Labels out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double s = 0.0;
    for (std::size_t t = 0; t < stumps.size(); ++t) s += alphas[t] * stumps[t].classify(X, i);
    out[i] = s >= 0.0 ? 1 : 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linear SVM (Pegasos)

void LinearSvm::fit(const Tensor& X, const Labels& y) {
  require_labels(X, y, "LinearSvm::fit");
  require_two_classes(y, "LinearSvm::fit");
  const std::size_t n = X.rows(), d = X.cols();
  weights.assign(d, 0.0);
  bias = 0.0;
  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t t = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double yi = y[idx] == 1 ? 1.0 : -1.0;
      double margin = bias;
      for (std::size_t j = 0; j < d; ++j) margin += weights[j] * X.at(idx, j);
      margin *= yi;
      const double decay = 1.0 - eta * lambda;
      for (double& wj : weights) wj *= decay;
      if (margin < 1.0) {
        for (std::size_t j = 0; j < d; ++j) weights[j] += eta * yi * X.at(idx, j);
        bias += eta * yi;
      }
    }
  }
}

Labels LinearSvm::predict(const Tensor& X) const {
  if (X.cols() != weights.size()) throw ShapeError("LinearSvm::predict: feature count mismatch");
  Labels out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double s = bias;
    for (std::size_t j = 0; j < X.cols(); ++j) s += weights[j] * X.at(i, j);
    out[i] = s >= 0.0 ? 1 : 0;
  }
  return out;
}

}  // namespace dndf

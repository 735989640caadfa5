#include "dndf/forest.hpp"

#include <algorithm>
#include <string>

#include "dndf/rng.hpp"

namespace dndf {

namespace {

std::string tree_key(int t, const char* part) {
  // Zero-padded so map order equals tree order.
  char buf[32];
  std::snprintf(buf, sizeof(buf), "tree%04d/%s", t, part);
  return buf;
}

}  // namespace

void ForestConfig::validate() const {
  if (num_trees < 1) throw ValidationError("ForestConfig: num_trees must be >= 1");
  if (batch_size < 1) throw ValidationError("ForestConfig: batch_size must be >= 1");
  if (epochs < 1) throw ValidationError("ForestConfig: epochs must be >= 1");
  adam.validate();
  tree.validate();
}

ForestModel init_forest(const ForestConfig& cfg) {
  cfg.validate();
  ForestModel m;
  m.config = cfg;
  m.trees.reserve(static_cast<std::size_t>(cfg.num_trees));
  for (int t = 0; t < cfg.num_trees; ++t) {
    TreeConfig tc = cfg.tree;
    tc.seed = cfg.seed ^ static_cast<std::uint64_t>(t);
    m.trees.push_back(init_tree(tc));
  }
  return m;
}

Tensor forest_forward(const ForestModel& m, const Tensor& X) {
  Tensor sum = Tensor::zeros({X.rows(), 2});
  for (const TreeParams& tree : m.trees) {
    const TreeForward f = tree_forward(tree, X);
    for (std::size_t i = 0; i < sum.size(); ++i) sum.data[i] += f.prob.data[i];
  }
  const double inv = 1.0 / static_cast<double>(m.trees.size());
  for (double& v : sum.data) v *= inv;
  return sum;
}

void train(ForestModel& m, const DesignMatrix& train_data) {
  const std::size_t n = train_data.n_rows();
  if (n == 0) throw ValidationError("train: empty training matrix");
  const bool has0 = std::find(train_data.y.begin(), train_data.y.end(), 0) != train_data.y.end();
  const bool has1 = std::find(train_data.y.begin(), train_data.y.end(), 1) != train_data.y.end();
  if (!has0 || !has1) throw ValidationError("train: training data contains a single class");

  const int T = m.config.num_trees;
  ParamStore store;
  for (int t = 0; t < T; ++t) {
    store.add(tree_key(t, "W"), m.trees[static_cast<std::size_t>(t)].routing_weights);
    store.add(tree_key(t, "b"), m.trees[static_cast<std::size_t>(t)].routing_bias);
    store.add(tree_key(t, "pi"), m.trees[static_cast<std::size_t>(t)].leaf_logits);
  }

  const std::size_t batch_size = static_cast<std::size_t>(m.config.batch_size);
  Rng shuffle_rng(mix_seed(m.config.seed, 0x7261696eULL));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 0; epoch < m.config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t end = std::min(start + batch_size, n);
      const std::size_t bsz = end - start;
      Tensor Xb = Tensor::zeros({bsz, train_data.n_cols()});
      Tensor yb = Tensor::zeros({bsz, 1});
      for (std::size_t i = 0; i < bsz; ++i) {
        const std::size_t row = order[start + i];
        for (std::size_t j = 0; j < train_data.n_cols(); ++j) {
          Xb.at(i, j) = train_data.X.at(row, j);
        }
        yb.data[i] = train_data.y[row];
      }

      // Forward all trees against the current parameters in the store.
      std::vector<TreeForward> forwards;
      forwards.reserve(static_cast<std::size_t>(T));
      Tensor mean_prob = Tensor::zeros({bsz, 2});
      for (int t = 0; t < T; ++t) {
        TreeParams params = m.trees[static_cast<std::size_t>(t)];
        params.routing_weights = store.value(tree_key(t, "W"));
        params.routing_bias = store.value(tree_key(t, "b"));
        params.leaf_logits = store.value(tree_key(t, "pi"));
        forwards.push_back(tree_forward(params, Xb));
        for (std::size_t i = 0; i < mean_prob.size(); ++i) {
          mean_prob.data[i] += forwards.back().prob.data[i];
        }
      }
      const double invT = 1.0 / static_cast<double>(T);
      for (double& v : mean_prob.data) v *= invT;

      const Tensor p1 = num::slice_cols(mean_prob, 1, 2);
      const BceResult bce = bce_loss(p1, yb);
      epoch_loss += bce.loss;
      ++batches;

      // d(mean)/d(tree prob) = 1/T for every tree.
      Tensor dprob_tree = num::slice_cols_backward(bce.grad, 2, 1);
      for (double& v : dprob_tree.data) v *= invT;

      std::map<std::string, Tensor> grads;
      for (int t = 0; t < T; ++t) {
        TreeParams params = m.trees[static_cast<std::size_t>(t)];
        params.routing_weights = store.value(tree_key(t, "W"));
        params.routing_bias = store.value(tree_key(t, "b"));
        params.leaf_logits = store.value(tree_key(t, "pi"));
        TreeGrads g = tree_backward(params, forwards[static_cast<std::size_t>(t)], dprob_tree);
        grads.emplace(tree_key(t, "W"), std::move(g.d_weights));
        grads.emplace(tree_key(t, "b"), std::move(g.d_bias));
        grads.emplace(tree_key(t, "pi"), std::move(g.d_leaf_logits));
      }
      adam_step(store, grads, m.config.adam);
    }
    m.training_log.push_back(epoch_loss / static_cast<double>(batches));
  }

  for (int t = 0; t < T; ++t) {
    m.trees[static_cast<std::size_t>(t)].routing_weights = store.value(tree_key(t, "W"));
    m.trees[static_cast<std::size_t>(t)].routing_bias = store.value(tree_key(t, "b"));
    m.trees[static_cast<std::size_t>(t)].leaf_logits = store.value(tree_key(t, "pi"));
  }
}

std::vector<int> predict(const ForestModel& m, const Tensor& X, double threshold) {
  const Tensor prob = forest_forward(m, X);
  std::vector<int> labels(X.rows(), 0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    labels[i] = prob.at(i, 1) >= threshold ? 1 : 0;
  }
  return labels;
}

}  // namespace dndf

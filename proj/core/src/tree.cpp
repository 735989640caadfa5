#include "dndf/tree.hpp"

#include <cmath>

#include "dndf/rng.hpp"

namespace dndf {

int TreeConfig::n_used() const {
  const long r = std::lround(used_features_rate * n_features);
  return static_cast<int>(std::max(1L, r));
}

void TreeConfig::validate() const {
  if (depth < 1) throw ValidationError("TreeConfig: depth must be >= 1");
  if (n_features < 1) throw ValidationError("TreeConfig: n_features must be >= 1");
  if (used_features_rate <= 0.0 || used_features_rate > 1.0) {
    throw ValidationError("TreeConfig: used_features_rate must be in (0, 1]");
  }
}

TreeParams init_tree(const TreeConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  TreeParams p;
  p.config = cfg;
  p.feature_mask = rng.sample_without_replacement(static_cast<std::size_t>(cfg.n_features),
                                                  static_cast<std::size_t>(cfg.n_used()));
  const std::size_t internal = static_cast<std::size_t>(cfg.internal_nodes());
  const std::size_t used = static_cast<std::size_t>(cfg.n_used());
  p.routing_weights = Tensor::zeros({internal, used});
  for (double& v : p.routing_weights.data) v = rng.uniform(-0.05, 0.05);
  p.routing_bias = Tensor::zeros({internal});
  for (double& v : p.routing_bias.data) v = rng.uniform(-0.05, 0.05);
  p.leaf_logits = Tensor::zeros({static_cast<std::size_t>(cfg.leaves()), 2});
  return p;
}

TreeForward tree_forward(const TreeParams& p, const Tensor& X) {
  if (X.rank() != 2 || X.cols() != static_cast<std::size_t>(p.config.n_features)) {
    throw ShapeError("tree_forward: input " + X.shape_str() + " expected [batch x " +
                     std::to_string(p.config.n_features) + "]");
  }
  const std::size_t batch = X.rows();
  const std::size_t used = p.feature_mask.size();
  const std::size_t internal = static_cast<std::size_t>(p.config.internal_nodes());

  TreeForward f;
  f.masked = Tensor::zeros({batch, used});
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t j = 0; j < used; ++j) f.masked.at(i, j) = X.at(i, p.feature_mask[j]);
  }

  // d = sigmoid(masked . W^T + b)
  f.decisions = Tensor::zeros({batch, internal});
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t n = 0; n < internal; ++n) {
      double z = p.routing_bias.data[n];
      for (std::size_t j = 0; j < used; ++j) {
        z += p.routing_weights.at(n, j) * f.masked.at(i, j);
      }
      f.decisions.at(i, n) =
          z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    }
  }

  // Level-wise reach probabilities: node n at level l occupies breadth-first
  // index (2^l - 1) + i; left child factor d, right child factor 1 - d.
  f.level_mu.reserve(static_cast<std::size_t>(p.config.depth) + 1);
  f.level_mu.push_back(Tensor::full({batch, 1}, 1.0));
  for (int level = 0; level < p.config.depth; ++level) {
    const std::size_t width = std::size_t{1} << level;
    const std::size_t offset = width - 1;
    const Tensor& prev = f.level_mu.back();
    Tensor next = Tensor::zeros({batch, width * 2});
    for (std::size_t i = 0; i < batch; ++i) {
      for (std::size_t k = 0; k < width; ++k) {
        const double d = f.decisions.at(i, offset + k);
        const double m = prev.at(i, k);
        next.at(i, 2 * k) = m * d;
        next.at(i, 2 * k + 1) = m * (1.0 - d);
      }
    }
    f.level_mu.push_back(std::move(next));
  }
  f.mu = f.level_mu.back();

  f.leaf_dist = num::softmax_rows(p.leaf_logits);
  f.prob = num::matmul(f.mu, f.leaf_dist);
  return f;
}

TreeGrads tree_backward(const TreeParams& p, const TreeForward& fwd, const Tensor& dprob) {
  const std::size_t batch = fwd.mu.rows();
  const std::size_t leaves = static_cast<std::size_t>(p.config.leaves());
  const std::size_t internal = static_cast<std::size_t>(p.config.internal_nodes());
  const std::size_t used = p.feature_mask.size();
  if (dprob.rank() != 2 || dprob.rows() != batch || dprob.cols() != 2) {
    throw ShapeError("tree_backward: dprob " + dprob.shape_str() + " expected [batch x 2]");
  }

  // prob = mu . leaf_dist
  auto [dmu, dleaf_dist] = num::matmul_backward(dprob, fwd.mu, fwd.leaf_dist);
  Tensor d_leaf_logits = num::softmax_rows_backward(dleaf_dist, fwd.leaf_dist);
  (void)leaves;

  // Walk levels top-down in the cache, bottom-up in the graph.
  Tensor d_decisions = Tensor::zeros({batch, internal});
  Tensor dlevel = std::move(dmu);
  for (int level = p.config.depth - 1; level >= 0; --level) {
    const std::size_t width = std::size_t{1} << level;
    const std::size_t offset = width - 1;
    const Tensor& parent_mu = fwd.level_mu[static_cast<std::size_t>(level)];
    Tensor dparent = Tensor::zeros({batch, width});
    for (std::size_t i = 0; i < batch; ++i) {
      for (std::size_t k = 0; k < width; ++k) {
        const double d = fwd.decisions.at(i, offset + k);
        const double m = parent_mu.at(i, k);
        const double gl = dlevel.at(i, 2 * k);
        const double gr = dlevel.at(i, 2 * k + 1);
        d_decisions.at(i, offset + k) = (gl - gr) * m;
        dparent.at(i, k) = gl * d + gr * (1.0 - d);
      }
    }
    dlevel = std::move(dparent);
  }

  const Tensor dlogits = num::sigmoid_backward(d_decisions, fwd.decisions);

  TreeGrads g;
  g.d_weights = Tensor::zeros({internal, used});
  g.d_bias = Tensor::zeros({internal});
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t n = 0; n < internal; ++n) {
      const double gz = dlogits.at(i, n);
      if (gz == 0.0) continue;
      g.d_bias.data[n] += gz;
      for (std::size_t j = 0; j < used; ++j) {
        g.d_weights.at(n, j) += gz * fwd.masked.at(i, j);
      }
    }
  }
  g.d_leaf_logits = std::move(d_leaf_logits);
  return g;
}

TreeGrads tree_grads(const TreeParams& p, const Tensor& X, const std::vector<int>& y) {
  if (y.size() != X.rows()) {
    throw ShapeError("tree_grads: label count " + std::to_string(y.size()) +
                     " does not match batch " + std::to_string(X.rows()));
  }
  const TreeForward fwd = tree_forward(p, X);
  Tensor p1 = num::slice_cols(fwd.prob, 1, 2);
  Tensor yt = Tensor::zeros({y.size(), 1});
  for (std::size_t i = 0; i < y.size(); ++i) yt.data[i] = y[i];
  const BceResult bce = bce_loss(p1, yt);
  Tensor dprob = num::slice_cols_backward(bce.grad, 2, 1);
  return tree_backward(p, fwd, dprob);
}

}  // namespace dndf

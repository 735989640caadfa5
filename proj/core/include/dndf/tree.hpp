#pragma once

#include <cstdint>
#include <vector>

#include "dndf/tensor.hpp"

namespace dndf {

struct TreeConfig {
  int depth = 10;
  double used_features_rate = 1.0;
  int n_features = 0;
  std::uint64_t seed = 0;

  int n_used() const;
  int leaves() const { return 1 << depth; }
  int internal_nodes() const { return (1 << depth) - 1; }
  void validate() const;
};

/// Parameters of one soft decision tree: a fixed seeded feature mask, a
/// linear routing layer (one sigmoid decision per internal node, breadth-first
/// indexed) and per-leaf class logits.
struct TreeParams {
  TreeConfig config;
  std::vector<std::size_t> feature_mask;  // n_used distinct feature indices
  Tensor routing_weights;                 // [internal_nodes x n_used]
  Tensor routing_bias;                    // [internal_nodes]
  Tensor leaf_logits;                     // [leaves x 2]
};

TreeParams init_tree(const TreeConfig& cfg);

struct TreeForward {
  Tensor mu;         // [batch x leaves] leaf-reach probabilities, rows sum to 1
  Tensor prob;       // [batch x 2] class probabilities
  // Cached intermediates for the backward pass.
  Tensor masked;     // [batch x n_used]
  Tensor decisions;  // [batch x internal_nodes] sigmoid outputs
  std::vector<Tensor> level_mu;  // mu after each level, level_mu[0] = ones [batch x 1]
  Tensor leaf_dist;  // [leaves x 2] softmax of leaf_logits
};

TreeForward tree_forward(const TreeParams& p, const Tensor& X);

struct TreeGrads {
  Tensor d_weights;
  Tensor d_bias;
  Tensor d_leaf_logits;
};

/// Reverse-mode pass from dloss/dprob back to all tree parameters.
TreeGrads tree_backward(const TreeParams& p, const TreeForward& fwd, const Tensor& dprob);

/// Gradients of mean BCE on prob[:, 1] (deceased-class probability).
TreeGrads tree_grads(const TreeParams& p, const Tensor& X, const std::vector<int>& y);

}  // namespace dndf

#pragma once

#include <cstdint>
#include <vector>

#include "dndf/adam.hpp"
#include "dndf/preprocess.hpp"
#include "dndf/tree.hpp"

namespace dndf {

struct ForestConfig {
  int num_trees = 25;
  TreeConfig tree{.depth = 10, .used_features_rate = 0.5};
  int batch_size = 16;
  int epochs = 30;
  AdamConfig adam;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ForestModel {
  ForestConfig config;
  std::vector<TreeParams> trees;
  std::vector<double> training_log;  // mean batch loss per epoch
};

/// Tree t gets seed cfg.seed ^ t so masks and weights differ per tree.
ForestModel init_forest(const ForestConfig& cfg);

/// Arithmetic mean of the trees' class probabilities, summed in tree order.
Tensor forest_forward(const ForestModel& m, const Tensor& X);

/// Joint training: seeded shuffle each epoch, mini-batches (last partial
/// batch kept), BCE on the forest's deceased-class probability, one Adam
/// step per batch over all trees' parameters.
void train(ForestModel& m, const DesignMatrix& train_data);

std::vector<int> predict(const ForestModel& m, const Tensor& X, double threshold = 0.5);

}  // namespace dndf

#include <benchmark/benchmark.h>

#include "dndf/baselines.hpp"
#include "dndf/forest.hpp"
#include "dndf/rng.hpp"
#include "dndf/tree.hpp"

namespace {

dndf::Tensor random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  dndf::Rng rng(seed);
  std::vector<double> data(rows * cols);
  for (double& v : data) v = rng.uniform();
  return dndf::Tensor({rows, cols}, data);
}

std::vector<int> random_labels(std::size_t n, std::uint64_t seed) {
  dndf::Rng rng(seed);
  std::vector<int> y(n);
  for (int& v : y) v = rng.bernoulli(0.5) ? 1 : 0;
  return y;
}

void BM_TreeForward(benchmark::State& state) {
  dndf::TreeConfig tc{.depth = static_cast<int>(state.range(0)),
                      .used_features_rate = 0.5,
                      .n_features = 9,
                      .seed = 1};
  const dndf::TreeParams tree = dndf::init_tree(tc);
  const dndf::Tensor X = random_matrix(16, 9, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dndf::tree_forward(tree, X));
  }
}
BENCHMARK(BM_TreeForward)->Arg(6)->Arg(10);

void BM_TreeBackward(benchmark::State& state) {
  dndf::TreeConfig tc{.depth = static_cast<int>(state.range(0)),
                      .used_features_rate = 0.5,
                      .n_features = 9,
                      .seed = 1};
  const dndf::TreeParams tree = dndf::init_tree(tc);
  const dndf::Tensor X = random_matrix(16, 9, 2);
  const std::vector<int> y = random_labels(16, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dndf::tree_grads(tree, X, y));
  }
}
BENCHMARK(BM_TreeBackward)->Arg(6)->Arg(10);

void BM_ForestForwardBatch(benchmark::State& state) {
  dndf::ForestConfig fc;
  fc.num_trees = static_cast<int>(state.range(0));
  fc.tree.n_features = 9;
  fc.seed = 4;
  const dndf::ForestModel forest = dndf::init_forest(fc);
  const dndf::Tensor X = random_matrix(16, 9, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dndf::forest_forward(forest, X));
  }
}
BENCHMARK(BM_ForestForwardBatch)->Arg(5)->Arg(25);

void BM_CartFit(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const dndf::Tensor X = random_matrix(n, 9, 6);
  const std::vector<int> y = random_labels(n, 7);
  for (auto _ : state) {
    dndf::CartTree tree;
    tree.fit(X, y);
    benchmark::DoNotOptimize(tree.nodes.size());
  }
}
BENCHMARK(BM_CartFit)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();

#include <cmath>
#include <cstdio>
#include <fstream>

#include <doctest.h>

#include "dndf/forest.hpp"
#include "dndf/gradcheck.hpp"
#include "dndf/rng.hpp"
#include "dndf/runner.hpp"
#include "dndf/tree.hpp"

using namespace dndf;

namespace {

Tensor random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> data(rows * cols);
  for (double& v : data) v = rng.uniform();
  return Tensor({rows, cols}, data);
}

}  // namespace

TEST_CASE("depth-1 tree forward matches the hand computation") {
  TreeConfig tc{.depth = 1, .used_features_rate = 1.0, .n_features = 1, .seed = 0};
  TreeParams p = init_tree(tc);
  p.routing_weights = Tensor::matrix(1, 1, {0.0});
  p.routing_bias = Tensor::row_vector({0.0});
  // Leaf 0 uniform, leaf 1 at [0.25, 0.75].
  p.leaf_logits = Tensor::matrix(2, 2, {0.0, 0.0, 0.0, std::log(3.0)});

  const TreeForward f = tree_forward(p, Tensor::matrix(1, 1, {0.42}));
  CHECK(f.mu.data[0] == doctest::Approx(0.5));
  CHECK(f.mu.data[1] == doctest::Approx(0.5));
  CHECK(f.prob.at(0, 0) == doctest::Approx(0.375));
  CHECK(f.prob.at(0, 1) == doctest::Approx(0.625));
}

TEST_CASE("depth-2 tree reach probabilities are products of routing decisions") {
  TreeConfig tc{.depth = 2, .used_features_rate = 1.0, .n_features = 1, .seed = 0};
  TreeParams p = init_tree(tc);
  for (double& v : p.routing_weights.data) v = 0.0;
  // Breadth-first: node 0 root, node 1 its left child, node 2 its right.
  p.routing_bias = Tensor::row_vector({0.0, std::log(3.0), -std::log(3.0)});

  const TreeForward f = tree_forward(p, Tensor::matrix(1, 1, {0.0}));
  // d0 = 0.5, d1 = 0.75, d2 = 0.25.
  CHECK(f.mu.at(0, 0) == doctest::Approx(0.5 * 0.75));
  CHECK(f.mu.at(0, 1) == doctest::Approx(0.5 * 0.25));
  CHECK(f.mu.at(0, 2) == doctest::Approx(0.5 * 0.25));
  CHECK(f.mu.at(0, 3) == doctest::Approx(0.5 * 0.75));
}

TEST_CASE("mu rows sum to 1 across depths") {
  Rng rng(31);
  for (int depth = 1; depth <= 10; ++depth) {
    TreeConfig tc{.depth = depth, .used_features_rate = 0.8, .n_features = 5,
                  .seed = rng.next_u64()};
    const TreeParams p = init_tree(tc);
    const TreeForward f = tree_forward(p, random_matrix(3, 5, rng.next_u64()));
    for (std::size_t r = 0; r < f.mu.rows(); ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < f.mu.cols(); ++c) sum += f.mu.at(r, c);
      CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("tree gradients agree with finite differences") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    TreeConfig tc{.depth = 1 + static_cast<int>(rng.index(3)),
                  .used_features_rate = 1.0,
                  .n_features = 4,
                  .seed = rng.next_u64()};
    TreeParams tree = init_tree(tc);
    for (double& v : tree.leaf_logits.data) v = rng.uniform(-1.0, 1.0);

    const Tensor X = random_matrix(3, 4, rng.next_u64());
    std::vector<int> y(3);
    for (int& v : y) v = rng.bernoulli(0.5) ? 1 : 0;

    ParamStore store;
    store.add("W", tree.routing_weights);
    store.add("b", tree.routing_bias);
    store.add("pi", tree.leaf_logits);
    auto loss_of = [&](const ParamStore& p) {
      TreeParams t = tree;
      t.routing_weights = p.value("W");
      t.routing_bias = p.value("b");
      t.leaf_logits = p.value("pi");
      const TreeForward fwd = tree_forward(t, X);
      std::vector<double> yd(y.begin(), y.end());
      return bce_loss(num::slice_cols(fwd.prob, 1, 2), Tensor({3, 1}, yd)).loss;
    };
    const TreeGrads g = tree_grads(tree, X, y);
    const GradCheckReport rep = gradient_check(
        loss_of, store, {{"W", g.d_weights}, {"b", g.d_bias}, {"pi", g.d_leaf_logits}}, 1e-5,
        1e-4);
    CHECK(rep.passed());
  }
}

TEST_CASE("init_tree derives mask size and per-tree seeds") {
  TreeConfig tc{.depth = 3, .used_features_rate = 0.5, .n_features = 9, .seed = 11};
  CHECK(tc.n_used() == 5);  // round(0.5 * 9) = 5 (half away from zero)
  CHECK(tc.leaves() == 8);
  CHECK(tc.internal_nodes() == 7);
  const TreeParams p = init_tree(tc);
  CHECK(p.feature_mask.size() == 5);
  for (double v : p.routing_weights.data) {
    CHECK(v >= -0.05);
    CHECK(v <= 0.05);
  }
  for (double v : p.leaf_logits.data) CHECK(v == 0.0);

  ForestConfig fc;
  fc.num_trees = 3;
  fc.tree = tc;
  fc.seed = 100;
  const ForestModel forest = init_forest(fc);
  REQUIRE(forest.trees.size() == 3);
  for (std::size_t t = 0; t < 3; ++t) CHECK(forest.trees[t].config.seed == (100 ^ t));
  CHECK(forest.trees[0].feature_mask != forest.trees[1].feature_mask);
}

TEST_CASE("forest forward is the exact arithmetic mean of its trees") {
  ForestConfig fc;
  fc.num_trees = 4;
  fc.tree = TreeConfig{.depth = 3, .used_features_rate = 0.6, .n_features = 5, .seed = 0};
  fc.seed = 9;
  const ForestModel m = init_forest(fc);
  const Tensor X = random_matrix(6, 5, 21);
  const Tensor combined = forest_forward(m, X);
  Tensor summed = Tensor::zeros(combined.shape);
  for (const TreeParams& t : m.trees) {
    const Tensor p = tree_forward(t, X).prob;
    for (std::size_t i = 0; i < summed.size(); ++i) summed.data[i] += p.data[i];
  }
  for (std::size_t i = 0; i < summed.size(); ++i) {
    CHECK(combined.data[i] == summed.data[i] * (1.0 / 4.0));
  }
}

TEST_CASE("joint training drives the loss down on separable data") {
  // y = 1 iff feature 0 > 0.5; two informative of four features.
  Rng rng(55);
  const std::size_t n = 200;
  std::vector<double> xs(n * 4);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < 4; ++j) xs[i * 4 + j] = rng.uniform();
    y[i] = xs[i * 4] > 0.5 ? 1 : 0;
  }
  DesignMatrix dm;
  dm.X = Tensor({n, 4}, xs);
  dm.y = y;
  for (int j = 0; j < 4; ++j) {
    dm.schema.columns.push_back({"f" + std::to_string(j), ColumnKind::Continuous, ""});
  }
  for (std::size_t i = 0; i < n; ++i) dm.row_ids.push_back("r" + std::to_string(i));

  ForestConfig fc;
  fc.num_trees = 4;
  fc.tree = TreeConfig{.depth = 4, .used_features_rate = 1.0, .n_features = 4, .seed = 0};
  fc.epochs = 20;
  fc.adam.learning_rate = 0.02;  // few batches here; the default crawls
  fc.seed = 5;
  ForestModel m = init_forest(fc);
  train(m, dm);
  REQUIRE(m.training_log.size() == 20);
  CHECK(m.training_log.back() < 0.5 * m.training_log.front());

  const std::vector<int> pred = predict(m, dm.X);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) correct += pred[i] == y[i];
  CHECK(correct > n * 0.9);
}

TEST_CASE("training rejects single-class data") {
  DesignMatrix dm;
  dm.X = random_matrix(10, 2, 3);
  dm.y.assign(10, 1);
  for (int j = 0; j < 2; ++j) dm.schema.columns.push_back({"f", ColumnKind::Continuous, ""});
  for (int i = 0; i < 10; ++i) dm.row_ids.push_back("r" + std::to_string(i));
  ForestConfig fc;
  fc.num_trees = 1;
  fc.tree = TreeConfig{.depth = 2, .used_features_rate = 1.0, .n_features = 2, .seed = 0};
  ForestModel m = init_forest(fc);
  CHECK_THROWS_AS(train(m, dm), ValidationError);
}

TEST_CASE("model save/load round trip is bit exact") {
  ForestConfig fc;
  fc.num_trees = 3;
  fc.tree = TreeConfig{.depth = 3, .used_features_rate = 0.7, .n_features = 6, .seed = 0};
  fc.epochs = 2;
  fc.seed = 77;
  ForestModel m = init_forest(fc);
  Rng rng(4);
  for (TreeParams& t : m.trees) {
    for (double& v : t.leaf_logits.data) v = rng.uniform(-2.0, 2.0);
  }
  m.training_log = {0.69314718055994531, 0.512345678901234};

  const std::string path = "/tmp/dndf_test_model.json";
  save_model(m, path);
  const ForestModel loaded = load_model(path);
  REQUIRE(loaded.trees.size() == m.trees.size());
  for (std::size_t t = 0; t < m.trees.size(); ++t) {
    CHECK(loaded.trees[t].feature_mask == m.trees[t].feature_mask);
    CHECK(loaded.trees[t].routing_weights.data == m.trees[t].routing_weights.data);
    CHECK(loaded.trees[t].routing_bias.data == m.trees[t].routing_bias.data);
    CHECK(loaded.trees[t].leaf_logits.data == m.trees[t].leaf_logits.data);
  }
  CHECK(loaded.training_log == m.training_log);
  const Tensor X = random_matrix(4, 6, 8);
  CHECK(forest_forward(loaded, X).data == forest_forward(m, X).data);
  std::remove(path.c_str());
}

TEST_CASE("load_model rejects corruption and wrong files") {
  ForestConfig fc;
  fc.num_trees = 1;
  fc.tree = TreeConfig{.depth = 2, .used_features_rate = 1.0, .n_features = 3, .seed = 0};
  const ForestModel m = init_forest(fc);
  const std::string path = "/tmp/dndf_test_model2.json";
  save_model(m, path);

  std::ifstream in(path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  // Flip one hex digit inside a tensor payload.
  const std::size_t pos = bytes.find("\"data\":\"");
  REQUIRE(pos != std::string::npos);
  bytes[pos + 8] = bytes[pos + 8] == '0' ? '1' : '0';
  std::ofstream(path) << bytes;
  CHECK_THROWS_AS(load_model(path), Error);

  std::ofstream(path) << "{\"format\":\"something-else\"}";
  CHECK_THROWS_AS(load_model(path), Error);
  std::ofstream(path) << "not json";
  CHECK_THROWS_AS(load_model(path), Error);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_model(path), IoError);
}

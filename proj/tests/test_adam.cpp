#include <cmath>

#include <doctest.h>

#include "dndf/adam.hpp"
#include "dndf/gradcheck.hpp"

using namespace dndf;

TEST_CASE("adam first step matches the closed form") {
  // With bias correction, step 1 collapses to -lr * g / (|g| + eps).
  ParamStore store;
  store.add("x", Tensor::row_vector({1.0}));
  const double g = 0.5;
  AdamConfig cfg;
  adam_step(store, {{"x", Tensor::row_vector({g})}}, cfg);
  const double expected = 1.0 - cfg.learning_rate * g / (std::fabs(g) + cfg.epsilon);
  CHECK(store.value("x").data[0] == doctest::Approx(expected).epsilon(1e-15));
  CHECK(store.state("x").t == 1);
}

TEST_CASE("adam second step with a constant gradient") {
  ParamStore store;
  store.add("x", Tensor::row_vector({0.0}));
  AdamConfig cfg;
  const std::map<std::string, Tensor> grads = {{"x", Tensor::row_vector({2.0})}};
  adam_step(store, grads, cfg);
  adam_step(store, grads, cfg);
  // Constant gradient: both bias-corrected moments equal the gradient (and
  // its square), so each step is again -lr * g / (|g| + eps).
  const double per_step = cfg.learning_rate * 2.0 / (2.0 + cfg.epsilon);
  CHECK(store.value("x").data[0] == doctest::Approx(-2.0 * per_step).epsilon(1e-12));
  CHECK(store.state("x").t == 2);
}

TEST_CASE("adam rejects mismatched gradient keys and shapes") {
  ParamStore store;
  store.add("a", Tensor::row_vector({1.0}));
  AdamConfig cfg;
  CHECK_THROWS_AS(adam_step(store, {}, cfg), ValidationError);
  CHECK_THROWS_AS(adam_step(store,
                            {{"a", Tensor::row_vector({1.0})}, {"b", Tensor::row_vector({1.0})}},
                            cfg),
                  ValidationError);
  CHECK_THROWS_AS(adam_step(store, {{"a", Tensor::row_vector({1.0, 2.0})}}, cfg), ShapeError);
}

TEST_CASE("adam config validation") {
  AdamConfig bad;
  bad.beta1 = 1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = AdamConfig{};
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("gradient_check flags a wrong analytic gradient") {
  ParamStore store;
  store.add("x", Tensor::row_vector({0.7}));
  auto f = [](const ParamStore& p) {
    const double x = p.value("x").data[0];
    return x * x;
  };
  const GradCheckReport good =
      gradient_check(f, store, {{"x", Tensor::row_vector({1.4})}}, 1e-5, 1e-6);
  CHECK(good.passed());
  const GradCheckReport bad =
      gradient_check(f, store, {{"x", Tensor::row_vector({2.0})}}, 1e-5, 1e-6);
  CHECK_FALSE(bad.passed());
  CHECK(bad.max_rel_error() > 0.2);
}

// Command-line front end: generate | run | report | check.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dndf/gradcheck.hpp"
#include "dndf/rng.hpp"
#include "dndf/runner.hpp"

namespace {

using nlohmann::json;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dndf::IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw dndf::ParseError("'" + path + "': " + e.what());
  }
}

int cmd_generate(const std::string& spec_path, const std::string& out_path) {
  dndf::SyntheticCohortSpec spec;
  if (!spec_path.empty()) {
    // Reuse the config parser: a spec file is the "synthetic" block on its own.
    json j;
    j["synthetic"] = load_json_file(spec_path);
    j["stages"] = {"s1"};
    j["models"] = {"gnb"};
    spec = *dndf::ExperimentConfig::from_json(j).synthetic;
  }
  spec.validate();
  const dndf::Cohort cohort = dndf::generate_synthetic(spec);
  dndf::save_cohort(cohort, out_path);

  const dndf::CohortSummary s = dndf::cohort_summary(cohort);
  std::cout << "wrote " << out_path << ": " << s.total << " records (" << s.recovered
            << " recovered, " << s.deceased << " deceased; " << s.clinical << " clinical, "
            << s.rtpcr << " rt-pcr), seed " << spec.seed << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& stage_arg,
            const std::string& model_arg, long long seed_arg, const std::string& out_arg) {
  dndf::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = dndf::ExperimentConfig::from_json(load_json_file(config_path));
  if (stage_arg != "all") cfg.stages = {dndf::stage_from_string(stage_arg)};
  if (model_arg != "all") cfg.models = {dndf::model_from_string(model_arg)};
  if (seed_arg >= 0) cfg.seed = static_cast<std::uint64_t>(seed_arg);
  if (!out_arg.empty()) cfg.out_dir = out_arg;
  cfg.validate();

  const dndf::RunOutput out = dndf::run_all(cfg);
  std::cout << dndf::emit_report_text(out.stages);
  if (!cfg.out_dir.empty()) std::cout << "outputs written to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_report(const std::string& results_path) {
  const std::vector<dndf::StageResult> results =
      dndf::results_from_json(load_json_file(results_path));
  std::cout << dndf::emit_report_text(results);
  return 0;
}

// Self-test: gradient checks on small random trees plus the structural
// invariants (rows of mu sum to 1, forest output is the exact tree mean).
int cmd_check(int trials, double tol) {
  dndf::Rng rng(20260823);
  bool all_ok = true;
  double worst = 0.0;

  for (int trial = 0; trial < trials; ++trial) {
    dndf::TreeConfig tc;
    tc.depth = 1 + static_cast<int>(rng.index(3));
    tc.n_features = 3 + static_cast<int>(rng.index(3));
    tc.used_features_rate = 1.0;
    tc.seed = rng.next_u64();
    dndf::TreeParams tree = dndf::init_tree(tc);
    // Freshly initialized leaves are uniform, which zeroes the routing
    // gradients; perturb them so every parameter matters.
    for (double& v : tree.leaf_logits.data) v = rng.uniform(-1.0, 1.0);

    const std::size_t batch = 2 + rng.index(3);
    std::vector<double> xs(batch * tc.n_features);
    for (double& v : xs) v = rng.uniform();
    const dndf::Tensor X({batch, static_cast<std::size_t>(tc.n_features)}, xs);
    std::vector<int> y(batch);
    for (int& v : y) v = rng.bernoulli(0.5) ? 1 : 0;

    dndf::ParamStore store;
    store.add("W", tree.routing_weights);
    store.add("b", tree.routing_bias);
    store.add("pi", tree.leaf_logits);

    auto loss_of = [&](const dndf::ParamStore& p) {
      dndf::TreeParams t = tree;
      t.routing_weights = p.value("W");
      t.routing_bias = p.value("b");
      t.leaf_logits = p.value("pi");
      const dndf::TreeForward fwd = dndf::tree_forward(t, X);
      std::vector<double> yd(y.begin(), y.end());
      return dndf::bce_loss(dndf::num::slice_cols(fwd.prob, 1, 2),
                            dndf::Tensor({batch, 1}, yd))
          .loss;
    };
    const dndf::TreeGrads g = dndf::tree_grads(tree, X, y);
    const dndf::GradCheckReport rep = dndf::gradient_check(
        loss_of, store, {{"W", g.d_weights}, {"b", g.d_bias}, {"pi", g.d_leaf_logits}}, 1e-5, tol);
    worst = std::max(worst, rep.max_rel_error());
    if (!rep.passed()) all_ok = false;
  }
  std::printf("gradient check: %d trials, max relative error %.3e (tolerance %.1e) -> %s\n",
              trials, worst, tol, all_ok ? "ok" : "FAILED");

  double worst_mu = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    dndf::TreeConfig tc;
    tc.depth = 1 + static_cast<int>(rng.index(10));
    tc.n_features = 5;
    tc.seed = rng.next_u64();
    const dndf::TreeParams tree = dndf::init_tree(tc);
    std::vector<double> xs(4 * 5);
    for (double& v : xs) v = rng.uniform();
    const dndf::TreeForward fwd = dndf::tree_forward(tree, dndf::Tensor({4, 5}, xs));
    for (std::size_t r = 0; r < fwd.mu.rows(); ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < fwd.mu.cols(); ++c) sum += fwd.mu.at(r, c);
      worst_mu = std::max(worst_mu, std::abs(sum - 1.0));
    }
  }
  const bool mu_ok = worst_mu < 1e-9;
  std::printf("mu normalization: max |row sum - 1| = %.3e -> %s\n", worst_mu,
              mu_ok ? "ok" : "FAILED");
  if (!mu_ok) all_ok = false;

  bool mean_ok = true;
  {
    dndf::ForestConfig fc;
    fc.num_trees = 5;
    fc.tree.depth = 4;
    fc.tree.used_features_rate = 0.6;
    fc.tree.n_features = 6;
    fc.seed = 42;
    const dndf::ForestModel forest = dndf::init_forest(fc);
    std::vector<double> xs(3 * 6);
    for (double& v : xs) v = rng.uniform();
    const dndf::Tensor X({3, 6}, xs);
    const dndf::Tensor combined = dndf::forest_forward(forest, X);
    dndf::Tensor summed = dndf::Tensor::zeros(combined.shape);
    for (const dndf::TreeParams& t : forest.trees) {
      const dndf::Tensor p = dndf::tree_forward(t, X).prob;
      for (std::size_t i = 0; i < summed.size(); ++i) summed.data[i] += p.data[i];
    }
    for (std::size_t i = 0; i < summed.size(); ++i) {
      if (combined.data[i] != summed.data[i] * (1.0 / fc.num_trees)) mean_ok = false;
    }
  }
  std::printf("forest averaging: mean of tree probabilities -> %s\n", mean_ok ? "ok" : "FAILED");
  if (!mean_ok) all_ok = false;

  if (!all_ok) throw dndf::NumericError("self-check failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular outcome-prediction toolkit (differentiable decision forests)"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Generate a synthetic cohort CSV");
  std::string gen_spec, gen_out = "cohort.csv";
  gen->add_option("--spec", gen_spec, "JSON generator spec (optional; defaults used otherwise)");
  gen->add_option("--out", gen_out, "Output CSV path");

  auto* run = app.add_subcommand("run", "Train and evaluate models");
  std::string run_config, run_stage = "all", run_model = "all", run_out;
  long long run_seed = -1;
  run->add_option("--config", run_config, "Experiment config JSON");
  run->add_option("--stage", run_stage, "s1|s2|s3|s4|all")
      ->check(CLI::IsMember({"s1", "s2", "s3", "s4", "all"}));
  run->add_option("--model", run_model, "Model name or 'all'");
  run->add_option("--seed", run_seed, "Override the experiment seed");
  run->add_option("--out", run_out, "Output directory");

  auto* rep = app.add_subcommand("report", "Re-render report text from results.json");
  std::string rep_results;
  rep->add_option("--results", rep_results, "Path to results.json")->required();

  auto* chk = app.add_subcommand("check", "Run gradient and invariant self-tests");
  int chk_trials = 100;
  double chk_tol = 1e-4;
  chk->add_option("--trials", chk_trials, "Gradient-check trials")->check(CLI::PositiveNumber);
  chk->add_option("--tol", chk_tol, "Relative-error tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_generate(gen_spec, gen_out);
    if (run->parsed()) return cmd_run(run_config, run_stage, run_model, run_seed, run_out);
    if (rep->parsed()) return cmd_report(rep_results);
    return cmd_check(chk_trials, chk_tol);
  } catch (const dndf::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

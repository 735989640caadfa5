#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "dndf/runner.hpp"

using namespace dndf;
namespace fs = std::filesystem;

namespace {

SyntheticCohortSpec small_spec() {
  SyntheticCohortSpec spec;
  spec.n_total = 300;
  spec.n_clinical = 180;
  spec.seed = 11;
  return spec;
}

ExperimentConfig fast_config() {
  ExperimentConfig cfg;
  cfg.synthetic = small_spec();
  cfg.models = {ModelKind::Logreg, ModelKind::Gnb, ModelKind::Cart};
  cfg.seed = 3;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("content_digest matches FNV-1a 64 test vectors") {
  CHECK(content_digest("") == "cbf29ce484222325");
  CHECK(content_digest("a") == "af63dc4c8601ec8c");
  CHECK(content_digest("foobar") == "85944171f73967e8");
}

TEST_CASE("model names round trip") {
  for (ModelKind m : all_models()) CHECK(model_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(model_from_string("nope"), ValidationError);
}

TEST_CASE("experiment config JSON round trip") {
  ExperimentConfig cfg = fast_config();
  cfg.stages = {Stage::S2, Stage::S4};
  cfg.test_fraction = 0.25;
  cfg.forest.num_trees = 7;
  cfg.forest.tree.depth = 5;
  cfg.out_dir = "/tmp/somewhere";

  const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.stages == cfg.stages);
  CHECK(back.models == cfg.models);
  CHECK(back.seed == cfg.seed);
  CHECK(back.test_fraction == cfg.test_fraction);
  CHECK(back.forest.num_trees == 7);
  CHECK(back.forest.tree.depth == 5);
  CHECK(back.out_dir == cfg.out_dir);
  REQUIRE(back.synthetic.has_value());
  CHECK(back.synthetic->n_total == 300);

  ExperimentConfig bad = fast_config();
  bad.stages.clear();
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = fast_config();
  bad.test_fraction = 1.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("run_stage produces consistent sizes and deterministic metrics") {
  const ExperimentConfig cfg = fast_config();
  const Cohort cohort = generate_synthetic(*cfg.synthetic);
  const StageResult a = run_stage(cfg, cohort, Stage::S1);
  CHECK(a.train_rows + a.test_rows == 300);
  CHECK(a.test_rows == 60);  // ceil(300 * 0.2)
  REQUIRE(a.models.size() == 3);
  for (const auto& mr : a.models) {
    CHECK(mr.report.cm.total() == static_cast<std::int64_t>(a.test_rows));
  }

  const StageResult b = run_stage(cfg, cohort, Stage::S1);
  for (std::size_t i = 0; i < a.models.size(); ++i) {
    CHECK(a.models[i].report.accuracy == b.models[i].report.accuracy);
    CHECK(a.models[i].seed == b.models[i].seed);
  }

  // Stage filters change the row counts.
  const StageResult s3 = run_stage(cfg, cohort, Stage::S3);
  CHECK(s3.train_rows + s3.test_rows == 180);
  const StageResult s4 = run_stage(cfg, cohort, Stage::S4);
  CHECK(s4.train_rows + s4.test_rows == 120);
  CHECK(s3.split_seed != s4.split_seed);
}

TEST_CASE("results JSON round trip preserves the reports") {
  const ExperimentConfig cfg = fast_config();
  const Cohort cohort = generate_synthetic(*cfg.synthetic);
  std::vector<StageResult> results = {run_stage(cfg, cohort, Stage::S2)};
  const std::vector<StageResult> back = results_from_json(results_to_json(results));
  REQUIRE(back.size() == 1);
  CHECK(back[0].stage == Stage::S2);
  CHECK(back[0].train_rows == results[0].train_rows);
  REQUIRE(back[0].models.size() == results[0].models.size());
  for (std::size_t i = 0; i < back[0].models.size(); ++i) {
    CHECK(back[0].models[i].report.accuracy == results[0].models[i].report.accuracy);
    CHECK(back[0].models[i].report.weighted_f1 == results[0].models[i].report.weighted_f1);
  }
  CHECK(emit_report_text(back) == emit_report_text(results));
}

TEST_CASE("run_all writes the documented files and digests them") {
  ExperimentConfig cfg = fast_config();
  cfg.stages = {Stage::S1, Stage::S4};
  cfg.out_dir = "/tmp/dndf_test_run";
  fs::remove_all(cfg.out_dir);

  const RunOutput out = run_all(cfg);
  CHECK(out.stages.size() == 2);
  for (const char* name : {"results.json", "report.txt", "timings.json", "manifest.json"}) {
    CHECK(fs::exists(fs::path(cfg.out_dir) / name));
  }
  const nlohmann::json manifest = nlohmann::json::parse(slurp(fs::path(cfg.out_dir) / "manifest.json"));
  CHECK(manifest.at("toolkit_version") == kToolkitVersion);
  CHECK(manifest.at("output_digests").contains("results.json"));
  CHECK_FALSE(manifest.at("output_digests").contains("timings.json"));
  CHECK(manifest.at("output_digests").at("results.json") ==
        content_digest(slurp(fs::path(cfg.out_dir) / "results.json")));
  CHECK(manifest.at("config").contains("seed"));
  CHECK_FALSE(manifest.at("config").contains("out_dir"));
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("run_all trains and saves the differentiable models when asked") {
  ExperimentConfig cfg = fast_config();
  cfg.stages = {Stage::S4};
  cfg.models = {ModelKind::Dndt};
  cfg.forest.tree.depth = 4;
  cfg.forest.epochs = 3;
  cfg.out_dir = "/tmp/dndf_test_run2";
  fs::remove_all(cfg.out_dir);

  const RunOutput out = run_all(cfg);
  REQUIRE(out.stages.size() == 1);
  REQUIRE(out.stages[0].forests.count("dndt") == 1);
  const ForestModel& m = out.stages[0].forests.at("dndt");
  CHECK(m.config.num_trees == 1);
  CHECK(m.config.tree.used_features_rate == 1.0);
  CHECK(m.training_log.size() == 3);

  const fs::path file = fs::path(cfg.out_dir) / "dndt_s4.model.json";
  REQUIRE(fs::exists(file));
  const ForestModel loaded = load_model(file.string());
  CHECK(loaded.trees[0].routing_weights.data == m.trees[0].routing_weights.data);
  fs::remove_all(cfg.out_dir);
}

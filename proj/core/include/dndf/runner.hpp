#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dndf/dataset.hpp"
#include "dndf/forest.hpp"
#include "dndf/metrics.hpp"
#include "dndf/preprocess.hpp"

namespace dndf {

inline constexpr const char* kToolkitVersion = "0.1.0";

enum class ModelKind { Gnb, Knn, Logreg, Cart, Rf, Svm, Adaboost, Dndt, Dndf };

std::string to_string(ModelKind m);
ModelKind model_from_string(const std::string& s);
std::vector<ModelKind> all_models();
std::vector<Stage> all_stages();

struct ExperimentConfig {
  std::optional<std::string> data_file;              // delimited cohort file
  std::optional<SyntheticCohortSpec> synthetic;      // used when no file given
  std::vector<Stage> stages = all_stages();
  std::vector<ModelKind> models = all_models();
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  ForestConfig forest;  // deep-forest defaults; the single-tree model derives from it
  std::string out_dir;

  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

struct ModelResult {
  ModelKind model = ModelKind::Gnb;
  ClassificationReport report;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
};

struct StageResult {
  Stage stage = Stage::S1;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::uint64_t split_seed = 0;
  std::vector<ModelResult> models;
  /// Trained differentiable models, keyed "dndt" / "dndf", kept for saving.
  std::map<std::string, ForestModel> forests;
};

struct RunOutput {
  std::vector<StageResult> stages;
  nlohmann::json manifest;
};

StageResult run_stage(const ExperimentConfig& cfg, const Cohort& cohort, Stage stage);

/// Runs the selected stages in order and, when out_dir is set, writes
/// results.json, report.txt, model files, a timing sidecar and manifest.json
/// (last). The manifest digests every deterministic output.
RunOutput run_all(const ExperimentConfig& cfg);

void save_model(const ForestModel& m, const std::string& path);
ForestModel load_model(const std::string& path);

std::string emit_report_text(const std::vector<StageResult>& results);
nlohmann::json results_to_json(const std::vector<StageResult>& results);
std::vector<StageResult> results_from_json(const nlohmann::json& j);

/// FNV-1a 64-bit digest, hex-encoded.
std::string content_digest(const std::string& bytes);

}  // namespace dndf

#include "dndf/runner.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dndf/baselines.hpp"
#include "dndf/rng.hpp"

namespace dndf {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kModelFormatVersion = 1;

std::size_t stage_index(Stage s) { return static_cast<std::size_t>(s); }

std::string hex_encode_doubles(const std::vector<double>& values) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(values.size() * 16);
  for (double v : values) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int shift = 60; shift >= 0; shift -= 4) {
      out.push_back(digits[(bits >> shift) & 0xF]);
    }
  }
  return out;
}

std::vector<double> hex_decode_doubles(const std::string& hex) {
  if (hex.size() % 16 != 0) throw ParseError("model file: malformed real-number payload");
  std::vector<double> out(hex.size() / 16);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (std::size_t k = 0; k < 16; ++k) {
      const char c = hex[i * 16 + k];
      std::uint64_t nibble;
      if (c >= '0' && c <= '9') nibble = static_cast<std::uint64_t>(c - '0');
      else if (c >= 'a' && c <= 'f') nibble = static_cast<std::uint64_t>(c - 'a' + 10);
      else throw ParseError("model file: invalid hex digit");
      bits = (bits << 4) | nibble;
    }
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

json tensor_to_json(const Tensor& t) {
  return json{{"shape", t.shape}, {"data", hex_encode_doubles(t.data)}};
}

Tensor tensor_from_json(const json& j) {
  const std::vector<std::size_t> shape = j.at("shape").get<std::vector<std::size_t>>();
  return Tensor(shape, hex_decode_doubles(j.at("data").get<std::string>()));
}

json forest_config_to_json(const ForestConfig& cfg) {
  return json{{"num_trees", cfg.num_trees},
              {"batch_size", cfg.batch_size},
              {"epochs", cfg.epochs},
              {"seed", cfg.seed},
              {"tree",
               {{"depth", cfg.tree.depth},
                {"used_features_rate", cfg.tree.used_features_rate},
                {"n_features", cfg.tree.n_features},
                {"seed", cfg.tree.seed}}},
              {"adam",
               {{"learning_rate", cfg.adam.learning_rate},
                {"beta1", cfg.adam.beta1},
                {"beta2", cfg.adam.beta2},
                {"epsilon", cfg.adam.epsilon}}}};
}

ForestConfig forest_config_from_json(const json& j) {
  ForestConfig cfg;
  cfg.num_trees = j.value("num_trees", cfg.num_trees);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("tree")) {
    const json& t = j.at("tree");
    cfg.tree.depth = t.value("depth", cfg.tree.depth);
    cfg.tree.used_features_rate = t.value("used_features_rate", cfg.tree.used_features_rate);
    cfg.tree.n_features = t.value("n_features", cfg.tree.n_features);
    cfg.tree.seed = t.value("seed", cfg.tree.seed);
  }
  if (j.contains("adam")) {
    const json& a = j.at("adam");
    cfg.adam.learning_rate = a.value("learning_rate", cfg.adam.learning_rate);
    cfg.adam.beta1 = a.value("beta1", cfg.adam.beta1);
    cfg.adam.beta2 = a.value("beta2", cfg.adam.beta2);
    cfg.adam.epsilon = a.value("epsilon", cfg.adam.epsilon);
  }
  return cfg;
}

json synthetic_spec_to_json(const SyntheticCohortSpec& s) {
  json rare = json::array();
  for (const auto& r : s.rare_symptom_columns) {
    rare.push_back({{"name", r.name}, {"frequency", r.frequency}});
  }
  return json{{"n_total", s.n_total},
              {"n_clinical", s.n_clinical},
              {"seed", s.seed},
              {"recovery_rate_negative", s.recovery_rate_negative},
              {"recovery_rate_positive", s.recovery_rate_positive},
              {"age_death_knee", s.age_death_knee},
              {"female_recovery_boost", s.female_recovery_boost},
              {"rare_symptom_columns", rare}};
}

SyntheticCohortSpec synthetic_spec_from_json(const json& j) {
  SyntheticCohortSpec s;
  s.n_total = j.value("n_total", s.n_total);
  s.n_clinical = j.value("n_clinical", s.n_clinical);
  s.seed = j.value("seed", s.seed);
  s.recovery_rate_negative = j.value("recovery_rate_negative", s.recovery_rate_negative);
  s.recovery_rate_positive = j.value("recovery_rate_positive", s.recovery_rate_positive);
  s.age_death_knee = j.value("age_death_knee", s.age_death_knee);
  s.female_recovery_boost = j.value("female_recovery_boost", s.female_recovery_boost);
  if (j.contains("rare_symptom_columns")) {
    s.rare_symptom_columns.clear();
    for (const auto& r : j.at("rare_symptom_columns")) {
      s.rare_symptom_columns.push_back({r.at("name").get<std::string>(),
                                        r.at("frequency").get<double>()});
    }
  }
  return s;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << bytes;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct FittedModel {
  Labels predictions;
  std::optional<ForestModel> forest;
};

FittedModel fit_and_predict(ModelKind kind, const ExperimentConfig& cfg,
                            const DesignMatrix& train_dm, const Tensor& test_X,
                            std::uint64_t seed) {
  const Tensor& X = train_dm.X;
  const Labels& y = train_dm.y;
  switch (kind) {
    case ModelKind::Gnb: {
      GaussianNb model;
      model.fit(X, y);
      return {model.predict(test_X), std::nullopt};
    }
    case ModelKind::Knn: {
      Knn model;
      model.fit(X, y);
      return {model.predict(test_X), std::nullopt};
    }
    case ModelKind::Logreg: {
      LogisticRegression model;
      model.fit(X, y);
      return {model.predict(test_X), std::nullopt};
    }
    case ModelKind::Cart: {
      CartTree model;
      model.fit(X, y);
      return {model.predict(test_X), std::nullopt};
    }
    case ModelKind::Rf: {
      RandomForest model;
      model.seed = seed;
      model.fit(X, y);
      return {model.predict(test_X), std::nullopt};
    }
    case ModelKind::Svm: {
      LinearSvm model;
      model.seed = seed;
      model.fit(X, y);
      return {model.predict(test_X), std::nullopt};
    }
    case ModelKind::Adaboost: {
      AdaBoost model;
      model.fit(X, y);
      return {model.predict(test_X), std::nullopt};
    }
    case ModelKind::Dndt:
    case ModelKind::Dndf: {
      ForestConfig fc = cfg.forest;
      fc.seed = seed;
      fc.tree.n_features = static_cast<int>(train_dm.n_cols());
      if (kind == ModelKind::Dndt) {
        // The single tree routes on the full feature set.
        fc.num_trees = 1;
        fc.tree.used_features_rate = 1.0;
      }
      ForestModel model = init_forest(fc);
      train(model, train_dm);
      return {predict(model, test_X), std::move(model)};
    }
  }
  throw ValidationError("unknown model kind");
}

}  // namespace

std::string to_string(ModelKind m) {
  switch (m) {
    case ModelKind::Gnb: return "gnb";
    case ModelKind::Knn: return "knn";
    case ModelKind::Logreg: return "logreg";
    case ModelKind::Cart: return "cart";
    case ModelKind::Rf: return "rf";
    case ModelKind::Svm: return "svm";
    case ModelKind::Adaboost: return "adaboost";
    case ModelKind::Dndt: return "dndt";
    case ModelKind::Dndf: return "dndf";
  }
  throw ValidationError("unknown model kind");
}

ModelKind model_from_string(const std::string& s) {
  for (ModelKind m : all_models()) {
    if (to_string(m) == s) return m;
  }
  throw ValidationError("unknown model '" + s + "'");
}

std::vector<ModelKind> all_models() {
  return {ModelKind::Gnb, ModelKind::Knn, ModelKind::Logreg,
          ModelKind::Cart, ModelKind::Rf, ModelKind::Svm,
          ModelKind::Adaboost, ModelKind::Dndt, ModelKind::Dndf};
}

std::vector<Stage> all_stages() { return {Stage::S1, Stage::S2, Stage::S3, Stage::S4}; }

void ExperimentConfig::validate() const {
  if (stages.empty()) throw ValidationError("ExperimentConfig: no stages selected");
  if (models.empty()) throw ValidationError("ExperimentConfig: no models selected");
  if (test_fraction <= 0.0 || test_fraction >= 1.0) {
    throw ValidationError("ExperimentConfig: test_fraction must be in (0, 1)");
  }
  if (synthetic) synthetic->validate();
}

json ExperimentConfig::to_json() const {
  json j;
  if (data_file) j["data_file"] = *data_file;
  if (synthetic) j["synthetic"] = synthetic_spec_to_json(*synthetic);
  json st = json::array();
  for (Stage s : stages) st.push_back(to_string(s));
  j["stages"] = st;
  json mo = json::array();
  for (ModelKind m : models) mo.push_back(to_string(m));
  j["models"] = mo;
  j["seed"] = seed;
  j["test_fraction"] = test_fraction;
  j["forest"] = forest_config_to_json(forest);
  if (!out_dir.empty()) j["out_dir"] = out_dir;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("data_file")) cfg.data_file = j.at("data_file").get<std::string>();
  if (j.contains("synthetic")) cfg.synthetic = synthetic_spec_from_json(j.at("synthetic"));
  if (j.contains("stages")) {
    cfg.stages.clear();
    for (const auto& s : j.at("stages")) cfg.stages.push_back(stage_from_string(s.get<std::string>()));
  }
  if (j.contains("models")) {
    cfg.models.clear();
    for (const auto& m : j.at("models")) cfg.models.push_back(model_from_string(m.get<std::string>()));
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.test_fraction = j.value("test_fraction", cfg.test_fraction);
  if (j.contains("forest")) cfg.forest = forest_config_from_json(j.at("forest"));
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.validate();
  return cfg;
}

StageResult run_stage(const ExperimentConfig& cfg, const Cohort& cohort, Stage stage) {
  cfg.validate();
  const FeatureSchema schema = select_by_frequency(cohort, 0.1);
  const DesignMatrix full = encode_features(cohort, schema);
  const DesignMatrix view = stage_view(full, stage);

  const std::uint64_t split_seed = mix_seed(cfg.seed, 1000 + stage_index(stage));
  SplitResult split = stratified_split(view, cfg.test_fraction, split_seed);
  apply_train_normalization(split);

  const auto c1 = static_cast<std::size_t>(
      std::count(split.train.y.begin(), split.train.y.end(), 1));
  const std::size_t c0 = split.train.y.size() - c1;
  if (c0 == 0 || c1 == 0) {
    throw ValidationError("stage " + to_string(stage) + ": training split is single-class (" +
                          std::to_string(c0) + " recovered, " + std::to_string(c1) + " deceased)");
  }

  StageResult result;
  result.stage = stage;
  result.train_rows = split.train.n_rows();
  result.test_rows = split.test.n_rows();
  result.split_seed = split_seed;
  std::size_t model_idx = 0;
  for (ModelKind kind : cfg.models) {
    const std::uint64_t model_seed = mix_seed(cfg.seed, 16 * stage_index(stage) + model_idx);
    const auto start = std::chrono::steady_clock::now();
    FittedModel fitted = fit_and_predict(kind, cfg, split.train, split.test.X, model_seed);
    const auto end = std::chrono::steady_clock::now();

    ModelResult mr;
    mr.model = kind;
    mr.report = report(confusion_matrix(split.test.y, fitted.predictions));
    mr.wall_seconds = std::chrono::duration<double>(end - start).count();
    mr.seed = model_seed;
    result.models.push_back(std::move(mr));
    if (fitted.forest) result.forests.emplace(to_string(kind), std::move(*fitted.forest));
    ++model_idx;
  }
  return result;
}

RunOutput run_all(const ExperimentConfig& cfg) {
  cfg.validate();
  Cohort cohort;
  std::string input_bytes;
  if (cfg.data_file) {
    input_bytes = read_file(*cfg.data_file);
    cohort = load_cohort(*cfg.data_file);
  } else {
    const SyntheticCohortSpec spec = cfg.synthetic.value_or(SyntheticCohortSpec{});
    cohort = generate_synthetic(spec);
    input_bytes = cohort_to_csv(cohort);
  }

  RunOutput out;
  json manifest;
  manifest["toolkit_version"] = kToolkitVersion;
  // The output location is not part of the experiment identity.
  json cfg_json = cfg.to_json();
  cfg_json.erase("out_dir");
  manifest["config"] = cfg_json;
  manifest["input_digest"] = content_digest(input_bytes);
  manifest["stages"] = json::array();
  manifest["output_digests"] = json::object();

  const bool writing = !cfg.out_dir.empty();
  if (writing) fs::create_directories(cfg.out_dir);
  auto emit = [&](const std::string& name, const std::string& bytes, bool digest) {
    const std::string path = (fs::path(cfg.out_dir) / name).string();
    write_file(path, bytes);
    if (digest) manifest["output_digests"][name] = content_digest(bytes);
  };

  std::optional<std::string> failure;
  std::vector<Stage> ordered = cfg.stages;
  std::sort(ordered.begin(), ordered.end());
  for (Stage stage : ordered) {
    try {
      StageResult sr = run_stage(cfg, cohort, stage);
      json entry;
      entry["stage"] = to_string(stage);
      entry["status"] = "ok";
      if (writing) {
        for (const auto& [name, model] : sr.forests) {
          const std::string file = name + "_" + to_string(stage) + ".model.json";
          save_model(model, (fs::path(cfg.out_dir) / file).string());
          manifest["output_digests"][file] =
              content_digest(read_file((fs::path(cfg.out_dir) / file).string()));
          entry["models"].push_back(file);
        }
      }
      manifest["stages"].push_back(entry);
      out.stages.push_back(std::move(sr));
    } catch (const Error& e) {
      failure = std::string("stage ") + to_string(stage) + ": " + e.what();
      manifest["stages"].push_back({{"stage", to_string(stage)}, {"status", "failed"},
                                    {"error", e.what()}});
      break;
    }
  }

  if (writing) {
    emit("results.json", results_to_json(out.stages).dump(2) + "\n", true);
    emit("report.txt", emit_report_text(out.stages), true);
    // Wall-clock timings are the one nondeterministic output; they live in a
    // sidecar that the manifest does not digest.
    json timings;
    for (const auto& sr : out.stages) {
      json row;
      for (const auto& mr : sr.models) row[to_string(mr.model)] = mr.wall_seconds;
      timings[to_string(sr.stage)] = row;
    }
    emit("timings.json", timings.dump(2) + "\n", false);
  }
  if (failure) manifest["failure"] = *failure;
  out.manifest = manifest;
  if (writing) emit("manifest.json", manifest.dump(2) + "\n", false);
  if (failure) throw Error(*failure);
  return out;
}

void save_model(const ForestModel& m, const std::string& path) {
  json j;
  j["format"] = "dndf-model";
  j["version"] = kModelFormatVersion;
  j["config"] = forest_config_to_json(m.config);
  j["seeds"] = {{"forest", m.config.seed}};
  json trees = json::array();
  for (const TreeParams& t : m.trees) {
    trees.push_back({{"seed", t.config.seed},
                     {"feature_mask", t.feature_mask},
                     {"routing_weights", tensor_to_json(t.routing_weights)},
                     {"routing_bias", tensor_to_json(t.routing_bias)},
                     {"leaf_logits", tensor_to_json(t.leaf_logits)}});
  }
  j["trees"] = std::move(trees);
  j["training_log"] = hex_encode_doubles(m.training_log);
  j["digest"] = content_digest(j.dump());
  write_file(path, j.dump() + "\n");
}

ForestModel load_model(const std::string& path) {
  const std::string bytes = read_file(path);
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::exception& e) {
    throw Error("load_model: cannot parse '" + path + "': " + e.what());
  }
  try {
    if (j.value("format", "") != "dndf-model") {
      throw Error("load_model: '" + path + "' is not a model file");
    }
    if (j.value("version", -1) != kModelFormatVersion) {
      throw Error("load_model: unsupported format version " +
                  std::to_string(j.value("version", -1)));
    }
    const std::string stored_digest = j.at("digest").get<std::string>();
    json copy = j;
    copy.erase("digest");
    copy["digest"] = content_digest(copy.dump());
    if (copy.at("digest").get<std::string>() != stored_digest) {
      throw Error("load_model: content digest mismatch in '" + path + "'");
    }
    ForestModel m;
    m.config = forest_config_from_json(j.at("config"));
    for (const auto& t : j.at("trees")) {
      TreeParams params;
      params.config = m.config.tree;
      params.config.seed = t.at("seed").get<std::uint64_t>();
      params.feature_mask = t.at("feature_mask").get<std::vector<std::size_t>>();
      params.routing_weights = tensor_from_json(t.at("routing_weights"));
      params.routing_bias = tensor_from_json(t.at("routing_bias"));
      params.leaf_logits = tensor_from_json(t.at("leaf_logits"));
      m.trees.push_back(std::move(params));
    }
    if (static_cast<int>(m.trees.size()) != m.config.num_trees) {
      throw Error("load_model: tree count does not match config");
    }
    m.training_log = hex_decode_doubles(j.at("training_log").get<std::string>());
    return m;
  } catch (const json::exception& e) {
    throw Error("load_model: malformed model file '" + path + "': " + e.what());
  }
}

std::string emit_report_text(const std::vector<StageResult>& results) {
  static const std::map<ModelKind, std::string> display_names = {
      {ModelKind::Gnb, "Gaussian NB"},
      {ModelKind::Knn, "KNN"},
      {ModelKind::Logreg, "Logistic Regression"},
      {ModelKind::Cart, "Decision Tree"},
      {ModelKind::Rf, "Random Forest"},
      {ModelKind::Svm, "SVM"},
      {ModelKind::Adaboost, "AdaBoost"},
      {ModelKind::Dndt, "Deep Neural Decision Tree"},
      {ModelKind::Dndf, "Deep Neural Decision Forest"},
  };
  std::ostringstream os;
  for (const auto& sr : results) {
    os << "=== Stage " << to_string(sr.stage) << " (train " << sr.train_rows << ", test "
       << sr.test_rows << ", split seed " << sr.split_seed << ") ===\n";
    os << "Model name                     Accuracy  Recall  Precision  F1-score\n";
    char line[160];
    for (const auto& mr : sr.models) {
      std::snprintf(line, sizeof(line), "%-30s %8.3f %7.3f %10.3f %9.3f\n",
                    display_names.at(mr.model).c_str(), round3(mr.report.accuracy),
                    round3(mr.report.weighted_recall), round3(mr.report.weighted_precision),
                    round3(mr.report.weighted_f1));
      os << line;
    }
    os << '\n';
    for (const auto& mr : sr.models) {
      os << "[" << to_string(mr.model) << "]\n" << render_report(mr.report) << '\n';
    }
  }
  return os.str();
}

json results_to_json(const std::vector<StageResult>& results) {
  json stages = json::array();
  for (const auto& sr : results) {
    json models = json::array();
    for (const auto& mr : sr.models) {
      const auto& r = mr.report;
      models.push_back({{"model", to_string(mr.model)},
                        {"seed", mr.seed},
                        {"accuracy", r.accuracy},
                        {"recall", r.weighted_recall},
                        {"precision", r.weighted_precision},
                        {"f1", r.weighted_f1},
                        {"confusion", {{"tn", r.cm.tn}, {"fp", r.cm.fp},
                                       {"fn", r.cm.fn}, {"tp", r.cm.tp}}}});
    }
    stages.push_back({{"stage", to_string(sr.stage)},
                      {"train_rows", sr.train_rows},
                      {"test_rows", sr.test_rows},
                      {"split_seed", sr.split_seed},
                      {"models", models}});
  }
  return json{{"toolkit_version", kToolkitVersion}, {"stages", stages}};
}

std::vector<StageResult> results_from_json(const json& j) {
  std::vector<StageResult> out;
  for (const auto& s : j.at("stages")) {
    StageResult sr;
    sr.stage = stage_from_string(s.at("stage").get<std::string>());
    sr.train_rows = s.at("train_rows").get<std::size_t>();
    sr.test_rows = s.at("test_rows").get<std::size_t>();
    sr.split_seed = s.at("split_seed").get<std::uint64_t>();
    for (const auto& m : s.at("models")) {
      ModelResult mr;
      mr.model = model_from_string(m.at("model").get<std::string>());
      mr.seed = m.at("seed").get<std::uint64_t>();
      ConfusionMatrix cm;
      cm.tn = m.at("confusion").at("tn").get<std::int64_t>();
      cm.fp = m.at("confusion").at("fp").get<std::int64_t>();
      cm.fn = m.at("confusion").at("fn").get<std::int64_t>();
      cm.tp = m.at("confusion").at("tp").get<std::int64_t>();
      mr.report = report(cm);
      sr.models.push_back(std::move(mr));
    }
    out.push_back(std::move(sr));
  }
  return out;
}

std::string content_digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dndf

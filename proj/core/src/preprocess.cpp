#include "dndf/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "dndf/rng.hpp"

namespace dndf {

namespace {

struct FlagSource {
  const char* name;
  bool PatientRecord::*field;
};

// Table-order boolean symptom candidates.
const std::vector<FlagSource> kFlagSources = {
    {"ventilator", &PatientRecord::ventilator},
    {"cough", &PatientRecord::cough},
    {"apnea", &PatientRecord::apnea},
    {"carcinoma", &PatientRecord::carcinoma},
    {"healthcare_staff", &PatientRecord::healthcare_staff},
    {"icu_hospitalization", &PatientRecord::icu_hospitalization},
};

double record_value(const PatientRecord& r, const FeatureColumn& col) {
  if (col.source == "test_result") return r.test_result == TestResult::Positive ? 1.0 : 0.0;
  if (col.source == "confirmation_method") {
    return r.confirmation_method == ConfirmationMethod::Clinical ? 1.0 : 0.0;
  }
  for (const auto& fs : kFlagSources) {
    if (col.source == fs.name) return r.*(fs.field) ? 1.0 : 0.0;
  }
  auto it = r.extra_symptoms.find(col.source);
  if (it == r.extra_symptoms.end()) {
    throw SchemaError("encode_features: record '" + r.id + "' lacks field '" + col.source + "'");
  }
  return it->second ? 1.0 : 0.0;
}

}  // namespace

std::string to_string(Stage s) {
  switch (s) {
    case Stage::S1: return "s1";
    case Stage::S2: return "s2";
    case Stage::S3: return "s3";
    case Stage::S4: return "s4";
  }
  throw ValidationError("unknown stage");
}

Stage stage_from_string(const std::string& s) {
  if (s == "s1" || s == "S1") return Stage::S1;
  if (s == "s2" || s == "S2") return Stage::S2;
  if (s == "s3" || s == "S3") return Stage::S3;
  if (s == "s4" || s == "S4") return Stage::S4;
  throw ValidationError("unknown stage '" + s + "'");
}

std::optional<std::size_t> FeatureSchema::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<double> normalize_age(const std::vector<int>& values) {
  if (values.empty()) throw ValidationError("normalize_age: empty input");
  const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  const double mn = *mn_it, mx = *mx_it;
  std::vector<double> out(values.size(), 0.0);
  if (mx > mn) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      out[i] = (values[i] - mn) / (mx - mn);
    }
  }
  return out;
}

FeatureSchema select_by_frequency(const Cohort& c, double threshold) {
  if (c.records.empty()) throw ValidationError("select_by_frequency: empty cohort");
  FeatureSchema schema;
  schema.selection_threshold = threshold;
  schema.columns.push_back({"test_result", ColumnKind::Binary, "test_result"});
  schema.columns.push_back({"confirmation_method", ColumnKind::Binary, "confirmation_method"});
  schema.columns.push_back({"age", ColumnKind::Continuous, "age"});

  const double n = static_cast<double>(c.records.size());
  for (const auto& fs : kFlagSources) {
    std::size_t count = 0;
    for (const auto& r : c.records) {
      if (r.*(fs.field)) ++count;
    }
    if (count / n >= threshold) {
      schema.columns.push_back({fs.name, ColumnKind::Binary, fs.name});
    }
  }
  std::map<std::string, std::size_t> extra_counts;  // sorted: alphabetical order
  for (const auto& r : c.records) {
    for (const auto& [name, v] : r.extra_symptoms) {
      if (v) extra_counts[name] += 1;
      else extra_counts.try_emplace(name, 0);
    }
  }
  for (const auto& [name, count] : extra_counts) {
    if (count / n >= threshold) {
      schema.columns.push_back({name, ColumnKind::Binary, name});
    }
  }
  return schema;
}

DesignMatrix encode_features(const Cohort& c, const FeatureSchema& schema) {
  if (c.records.empty()) throw ValidationError("encode_features: empty cohort");
  DesignMatrix dm;
  dm.schema = schema;

  std::vector<int> ages;
  ages.reserve(c.records.size());
  for (const auto& r : c.records) ages.push_back(r.age);
  const std::vector<double> scaled_age = normalize_age(ages);
  const auto [mn, mx] = std::minmax_element(ages.begin(), ages.end());
  dm.schema.age_min_max = {static_cast<double>(*mn), static_cast<double>(*mx)};

  const std::size_t cols = schema.columns.size();
  dm.X = Tensor::zeros({c.records.size(), cols});
  dm.y.reserve(c.records.size());
  dm.row_ids.reserve(c.records.size());
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    const PatientRecord& r = c.records[i];
    for (std::size_t j = 0; j < cols; ++j) {
      const FeatureColumn& col = schema.columns[j];
      dm.X.at(i, j) = col.source == "age" ? scaled_age[i] : record_value(r, col);
    }
    dm.y.push_back(r.outcome == Outcome::Deceased ? 1 : 0);
    dm.row_ids.push_back(r.id);
  }
  return dm;
}

DesignMatrix stage_view(const DesignMatrix& dm, Stage stage) {
  if (stage == Stage::S1) return dm;

  if (stage == Stage::S2) {
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < dm.n_cols(); ++j) {
      const std::string& name = dm.schema.columns[j].name;
      if (name != "test_result" && name != "confirmation_method") keep.push_back(j);
    }
    DesignMatrix out;
    out.schema.selection_threshold = dm.schema.selection_threshold;
    out.schema.age_min_max = dm.schema.age_min_max;
    for (std::size_t j : keep) out.schema.columns.push_back(dm.schema.columns[j]);
    out.X = Tensor::zeros({dm.n_rows(), keep.size()});
    for (std::size_t i = 0; i < dm.n_rows(); ++i) {
      for (std::size_t j = 0; j < keep.size(); ++j) out.X.at(i, j) = dm.X.at(i, keep[j]);
    }
    out.y = dm.y;
    out.row_ids = dm.row_ids;
    return out;
  }

  // S3 / S4: row filters on the confirmation_method column.
  const auto method_col = dm.schema.column_index("confirmation_method");
  if (!method_col) {
    throw ValidationError("stage_view: confirmation_method column required for " + to_string(stage));
  }
  const double want = stage == Stage::S3 ? 1.0 : 0.0;
  DesignMatrix out;
  out.schema = dm.schema;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < dm.n_rows(); ++i) {
    if (dm.X.at(i, *method_col) == want) rows.push_back(i);
  }
  out.X = Tensor::zeros({rows.size(), dm.n_cols()});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < dm.n_cols(); ++j) out.X.at(i, j) = dm.X.at(rows[i], j);
    out.y.push_back(dm.y[rows[i]]);
    out.row_ids.push_back(dm.row_ids[rows[i]]);
  }
  return out;
}

SplitResult stratified_split(const DesignMatrix& dm, double test_fraction, std::uint64_t seed) {
  if (test_fraction <= 0.0 || test_fraction >= 1.0) {
    throw ValidationError("stratified_split: test_fraction must be in (0, 1)");
  }
  std::vector<std::size_t> class_rows[2];
  for (std::size_t i = 0; i < dm.n_rows(); ++i) class_rows[dm.y[i]].push_back(i);
  for (int c = 0; c < 2; ++c) {
    if (class_rows[c].size() < 2) {
      throw ValidationError("stratified_split: class " + std::to_string(c) + " has " +
                            std::to_string(class_rows[c].size()) + " rows (need >= 2)");
    }
  }

  // Per-class test counts: floor of the ideal, then largest fractional
  // remainders until the total reaches ceil(n * test_fraction).
  const std::size_t n_test_total =
      static_cast<std::size_t>(std::ceil(dm.n_rows() * test_fraction));
  std::size_t counts[2];
  double fracs[2];
  std::size_t assigned = 0;
  for (int c = 0; c < 2; ++c) {
    const double ideal = class_rows[c].size() * test_fraction;
    counts[c] = static_cast<std::size_t>(std::floor(ideal));
    fracs[c] = ideal - counts[c];
    assigned += counts[c];
  }
  while (assigned < n_test_total) {
    const int c = fracs[1] > fracs[0] ? 1 : 0;
    counts[c] += 1;
    fracs[c] = -1.0;
    assigned += 1;
  }

  Rng rng(seed);
  std::vector<bool> in_test(dm.n_rows(), false);
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> rows = class_rows[c];
    rng.shuffle(rows);
    for (std::size_t i = 0; i < counts[c]; ++i) in_test[rows[i]] = true;
  }

  auto take = [&](bool test_part) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < dm.n_rows(); ++i) {
      if (in_test[i] == test_part) rows.push_back(i);
    }
    DesignMatrix part;
    part.schema = dm.schema;
    part.X = Tensor::zeros({rows.size(), dm.n_cols()});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < dm.n_cols(); ++j) part.X.at(i, j) = dm.X.at(rows[i], j);
      part.y.push_back(dm.y[rows[i]]);
      part.row_ids.push_back(dm.row_ids[rows[i]]);
    }
    return part;
  };

  SplitResult result;
  result.train = take(false);
  result.test = take(true);
  result.seed = seed;
  result.test_fraction = test_fraction;
  return result;
}

void apply_train_normalization(SplitResult& split) {
  const auto age_col = split.train.schema.column_index("age");
  if (!age_col || !split.train.schema.age_min_max) return;
  const auto [old_mn, old_mx] = *split.train.schema.age_min_max;
  const double old_span = old_mx - old_mn;
  auto raw_of = [&](double v) { return old_span > 0.0 ? v * old_span + old_mn : old_mn; };

  double mn = std::numeric_limits<double>::infinity();
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < split.train.n_rows(); ++i) {
    const double raw = raw_of(split.train.X.at(i, *age_col));
    mn = std::min(mn, raw);
    mx = std::max(mx, raw);
  }
  const double span = mx - mn;
  auto rescale = [&](DesignMatrix& part, bool clamp) {
    for (std::size_t i = 0; i < part.n_rows(); ++i) {
      const double raw = raw_of(part.X.at(i, *age_col));
      double v = span > 0.0 ? (raw - mn) / span : 0.0;
      if (clamp) v = std::clamp(v, 0.0, 1.0);
      part.X.at(i, *age_col) = v;
    }
    part.schema.age_min_max = {mn, mx};
  };
  rescale(split.train, false);
  rescale(split.test, true);
}

std::string design_matrix_to_csv(const DesignMatrix& dm) {
  std::ostringstream os;
  os << "id";
  for (const auto& col : dm.schema.columns) os << ',' << col.name;
  os << ",outcome\n";
  for (std::size_t i = 0; i < dm.n_rows(); ++i) {
    os << dm.row_ids[i];
    for (std::size_t j = 0; j < dm.n_cols(); ++j) os << ',' << dm.X.at(i, j);
    os << ',' << dm.y[i] << '\n';
  }
  return os.str();
}

}  // namespace dndf

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dndf/dataset.hpp"
#include "dndf/tensor.hpp"

namespace dndf {

enum class Stage { S1, S2, S3, S4 };

std::string to_string(Stage s);
Stage stage_from_string(const std::string& s);

enum class ColumnKind { Continuous, Binary };

struct FeatureColumn {
  std::string name;
  ColumnKind kind = ColumnKind::Binary;
  std::string source;  // record field or extra-symptom key
};

struct FeatureSchema {
  std::vector<FeatureColumn> columns;
  double selection_threshold = 0.1;
  /// Min/max used to scale the age column, so the scaling can be redone
  /// with train-only statistics after the split.
  std::optional<std::pair<double, double>> age_min_max;

  std::optional<std::size_t> column_index(const std::string& name) const;
};

struct DesignMatrix {
  Tensor X;                         // [n_rows x n_cols]
  std::vector<int> y;               // 1 = deceased
  FeatureSchema schema;
  std::vector<std::string> row_ids;

  std::size_t n_rows() const { return row_ids.size(); }
  std::size_t n_cols() const { return schema.columns.size(); }
};

struct SplitResult {
  DesignMatrix train;
  DesignMatrix test;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
};

/// Min-max scaling: v -> (v - min) / (max - min); degenerate range maps to 0.
std::vector<double> normalize_age(const std::vector<int>& values);

/// Retains binary symptoms whose frequency is >= threshold; test_result,
/// confirmation_method and age are always retained. Column order is the
/// fixed study order followed by surviving extras alphabetically.
FeatureSchema select_by_frequency(const Cohort& c, double threshold);

DesignMatrix encode_features(const Cohort& c, const FeatureSchema& schema);

DesignMatrix stage_view(const DesignMatrix& dm, Stage stage);

/// Per-class seeded shuffle; test sizes allocated per class by largest
/// remainder so the test partition totals ceil(n * test_fraction).
SplitResult stratified_split(const DesignMatrix& dm, double test_fraction, std::uint64_t seed);

/// Rescales the age column of both partitions using train-only min/max
/// (test values clamped into [0, 1]).
void apply_train_normalization(SplitResult& split);

/// Debug export: same delimited encoding as the input schema.
std::string design_matrix_to_csv(const DesignMatrix& dm);

}  // namespace dndf

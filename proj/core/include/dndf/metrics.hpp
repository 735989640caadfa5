#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dndf/error.hpp"

namespace dndf {

/// Class 1 (deceased) is the "positive" class.
struct ConfusionMatrix {
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tp = 0;

  std::int64_t total() const { return tn + fp + fn + tp; }
};

ConfusionMatrix confusion_matrix(const std::vector<int>& y_true, const std::vector<int>& y_pred);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

struct ClassificationReport {
  ConfusionMatrix cm;
  std::array<ClassMetrics, 2> per_class;
  double accuracy = 0.0;
  // Support-weighted aggregates; weighted recall coincides with accuracy.
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
};

/// Per-class and support-weighted metrics. Zero-denominator metrics are 0.
ClassificationReport report(const ConfusionMatrix& cm);

/// Value rounded half away from zero to three decimals, as in the tables.
double round3(double v);

std::string render_report(const ClassificationReport& r);

}  // namespace dndf

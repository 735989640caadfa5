#include "dndf/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace dndf {

ConfusionMatrix confusion_matrix(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ValidationError("confusion_matrix: length mismatch " + std::to_string(y_true.size()) +
                          " vs " + std::to_string(y_pred.size()));
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) {
      throw ValidationError("confusion_matrix: labels must be 0/1 (row " + std::to_string(i) + ")");
    }
    if (t == 1 && p == 1) ++cm.tp;
    else if (t == 1 && p == 0) ++cm.fn;
    else if (t == 0 && p == 1) ++cm.fp;
    else ++cm.tn;
  }
  return cm;
}

namespace {

double ratio(std::int64_t num, std::int64_t den) {
  return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

}  // namespace

ClassificationReport report(const ConfusionMatrix& cm) {
  if (cm.total() <= 0) throw ValidationError("report: empty confusion matrix");
  if (cm.tn < 0 || cm.fp < 0 || cm.fn < 0 || cm.tp < 0) {
    throw ValidationError("report: negative count in confusion matrix");
  }
  ClassificationReport r;
  r.cm = cm;

  // Class 0 (recovered): predicted-negative diagonal.
  r.per_class[0].support = cm.tn + cm.fp;
  r.per_class[0].precision = ratio(cm.tn, cm.tn + cm.fn);
  r.per_class[0].recall = ratio(cm.tn, cm.tn + cm.fp);
  // Class 1 (deceased).
  r.per_class[1].support = cm.tp + cm.fn;
  r.per_class[1].precision = ratio(cm.tp, cm.tp + cm.fp);
  r.per_class[1].recall = ratio(cm.tp, cm.tp + cm.fn);
  for (auto& c : r.per_class) {
    const double pr = c.precision + c.recall;
    c.f1 = pr > 0.0 ? 2.0 * c.precision * c.recall / pr : 0.0;
  }

  const double total = static_cast<double>(cm.total());
  r.accuracy = static_cast<double>(cm.tn + cm.tp) / total;
  r.weighted_precision =
      (r.per_class[0].support * r.per_class[0].precision +
       r.per_class[1].support * r.per_class[1].precision) / total;
  r.weighted_recall =
      (r.per_class[0].support * r.per_class[0].recall +
       r.per_class[1].support * r.per_class[1].recall) / total;
  r.weighted_f1 =
      (r.per_class[0].support * r.per_class[0].f1 +
       r.per_class[1].support * r.per_class[1].f1) / total;
  return r;
}

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

std::string render_report(const ClassificationReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << "confusion matrix (rows = actual, cols = predicted; positive = deceased)\n";
  os << "            pred 0   pred 1\n";
  os << "  actual 0  " << std::setw(6) << r.cm.tn << "   " << std::setw(6) << r.cm.fp << "\n";
  os << "  actual 1  " << std::setw(6) << r.cm.fn << "   " << std::setw(6) << r.cm.tp << "\n";
  os << "  class 0: precision " << r.per_class[0].precision << " recall " << r.per_class[0].recall
     << " f1 " << r.per_class[0].f1 << " support " << r.per_class[0].support << "\n";
  os << "  class 1: precision " << r.per_class[1].precision << " recall " << r.per_class[1].recall
     << " f1 " << r.per_class[1].f1 << " support " << r.per_class[1].support << "\n";
  os << "  accuracy " << r.accuracy << "  weighted recall " << r.weighted_recall
     << "  weighted precision " << r.weighted_precision << "  weighted f1 " << r.weighted_f1
     << "\n";
  return os.str();
}

}  // namespace dndf

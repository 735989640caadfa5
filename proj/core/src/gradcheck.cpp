#include "dndf/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "dndf/error.hpp"

namespace dndf {

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.max_rel_error);
  return m;
}

bool GradCheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

GradCheckReport gradient_check(const std::function<double(const ParamStore&)>& f,
                               const ParamStore& params,
                               const std::map<std::string, Tensor>& analytic, double step,
                               double tol) {
  GradCheckReport report;
  report.tol = tol;
  for (const std::string& name : params.names()) {
    auto ait = analytic.find(name);
    if (ait == analytic.end()) {
      throw ValidationError("gradient_check: no analytic gradient for '" + name + "'");
    }
    const Tensor& a = ait->second;
    GradCheckEntry entry;
    entry.name = name;
    ParamStore work = params;
    Tensor& theta = work.value(name);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double orig = theta.data[i];
      theta.data[i] = orig + step;
      const double fp = f(work);
      theta.data[i] = orig - step;
      const double fm = f(work);
      theta.data[i] = orig;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw NumericError("gradient_check: non-finite loss while perturbing '" + name + "'");
      }
      const double numeric = (fp - fm) / (2.0 * step);
      const double av = a.data[i];
      const double diff = std::fabs(av - numeric);
      // Below ~1e-9 the central difference is round-off noise; a relative
      // comparison there would flag exact zero gradients as wrong.
      if (diff <= 1e-9) continue;
      const double denom = std::max({std::fabs(av), std::fabs(numeric), 1e-12});
      const double rel = diff / denom;
      entry.max_rel_error = std::max(entry.max_rel_error, rel);
    }
    entry.passed = entry.max_rel_error < tol;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace dndf

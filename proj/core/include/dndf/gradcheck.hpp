#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dndf/adam.hpp"

namespace dndf {

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tol = 0.0;

  double max_rel_error() const;
  bool passed() const;
};

/// Compares analytic gradients against central finite differences, coordinate
/// by coordinate. Relative error is |a - n| / max(|a|, |n|, 1e-12).
GradCheckReport gradient_check(const std::function<double(const ParamStore&)>& f,
                               const ParamStore& params,
                               const std::map<std::string, Tensor>& analytic, double step,
                               double tol);

}  // namespace dndf

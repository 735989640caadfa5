#include "dndf/adam.hpp"

#include <cmath>

#include "dndf/error.hpp"

namespace dndf {

void AdamConfig::validate() const {
  if (learning_rate <= 0.0) throw ValidationError("AdamConfig: learning_rate must be positive");
  if (beta1 < 0.0 || beta1 >= 1.0) throw ValidationError("AdamConfig: beta1 must be in [0, 1)");
  if (beta2 < 0.0 || beta2 >= 1.0) throw ValidationError("AdamConfig: beta2 must be in [0, 1)");
  if (epsilon <= 0.0) throw ValidationError("AdamConfig: epsilon must be positive");
}

void ParamStore::add(const std::string& name, Tensor value) {
  if (params_.count(name)) throw ValidationError("ParamStore: duplicate parameter '" + name + "'");
  AdamState st;
  st.m = Tensor::zeros(value.shape);
  st.v = Tensor::zeros(value.shape);
  state_[name] = std::move(st);
  params_[name] = std::move(value);
}

Tensor& ParamStore::value(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ValidationError("ParamStore: unknown parameter '" + name + "'");
  return it->second;
}

const Tensor& ParamStore::value(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ValidationError("ParamStore: unknown parameter '" + name + "'");
  return it->second;
}

const AdamState& ParamStore::state(const std::string& name) const {
  auto it = state_.find(name);
  if (it == state_.end()) throw ValidationError("ParamStore: unknown parameter '" + name + "'");
  return it->second;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [k, v] : params_) out.push_back(k);
  return out;
}

void adam_step(ParamStore& store, const std::map<std::string, Tensor>& grads,
               const AdamConfig& cfg) {
  cfg.validate();
  for (const auto& [name, g] : grads) {
    if (!store.contains(name)) {
      throw ValidationError("adam_step: gradient for unknown parameter '" + name + "'");
    }
  }
  for (auto& [name, theta] : store.params_) {
    auto git = grads.find(name);
    if (git == grads.end()) {
      throw ValidationError("adam_step: missing gradient for parameter '" + name + "'");
    }
    const Tensor& g = git->second;
    if (!g.same_shape(theta)) {
      throw ShapeError("adam_step: gradient shape " + g.shape_str() + " for '" + name +
                       "' does not match parameter " + theta.shape_str());
    }
    AdamState& st = store.state_[name];
    st.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double gi = g.data[i];
      st.m.data[i] = cfg.beta1 * st.m.data[i] + (1.0 - cfg.beta1) * gi;
      st.v.data[i] = cfg.beta2 * st.v.data[i] + (1.0 - cfg.beta2) * gi * gi;
      const double mhat = st.m.data[i] / bc1;
      const double vhat = st.v.data[i] / bc2;
      theta.data[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
  }
}

}  // namespace dndf

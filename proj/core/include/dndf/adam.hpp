#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dndf/tensor.hpp"

namespace dndf {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;

  void validate() const;
};

struct AdamState {
  Tensor m;  // first moment
  Tensor v;  // second moment
  std::int64_t t = 0;
};

/// Named parameter tensors with per-parameter Adam state. Iteration order is
/// the map's key order, which keeps updates deterministic.
class ParamStore {
 public:
  void add(const std::string& name, Tensor value);
  bool contains(const std::string& name) const { return params_.count(name) > 0; }
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  const AdamState& state(const std::string& name) const;
  std::vector<std::string> names() const;
  std::size_t size() const { return params_.size(); }

  friend void adam_step(ParamStore& store, const std::map<std::string, Tensor>& grads,
                        const AdamConfig& cfg);

 private:
  std::map<std::string, Tensor> params_;
  std::map<std::string, AdamState> state_;
};

/// One Adam update with bias correction over every parameter in the store.
/// The gradient map must carry exactly the store's keys.
void adam_step(ParamStore& store, const std::map<std::string, Tensor>& grads,
               const AdamConfig& cfg);

}  // namespace dndf

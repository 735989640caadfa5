#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dndf/error.hpp"

namespace dndf {

/// Dense row-major tensor of 64-bit reals. Rank 1 and 2 are what the
/// toolkit actually uses; shape is kept general for reshape.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, std::vector<double> d);

  static Tensor zeros(std::vector<std::size_t> s);
  static Tensor full(std::vector<std::size_t> s, double value);
  static Tensor row_vector(std::vector<double> d);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> d);

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  double& at(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

  std::string shape_str() const;
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

namespace num {

// Forward kernels. Each has a matching backward that maps the gradient of a
// scalar loss w.r.t. the kernel output to gradients w.r.t. the inputs.

Tensor matmul(const Tensor& a, const Tensor& b);
std::pair<Tensor, Tensor> matmul_backward(const Tensor& grad, const Tensor& a, const Tensor& b);

/// [n x m] + [m] row-vector broadcast.
Tensor add_rowvec(const Tensor& a, const Tensor& v);
std::pair<Tensor, Tensor> add_rowvec_backward(const Tensor& grad);

Tensor multiply(const Tensor& a, const Tensor& b);
std::pair<Tensor, Tensor> multiply_backward(const Tensor& grad, const Tensor& a, const Tensor& b);

Tensor sigmoid(const Tensor& x);
/// Takes the forward output y = sigmoid(x).
Tensor sigmoid_backward(const Tensor& grad, const Tensor& y);

/// Softmax over the last axis of a rank-2 tensor.
Tensor softmax_rows(const Tensor& x);
Tensor softmax_rows_backward(const Tensor& grad, const Tensor& y);

Tensor nat_log(const Tensor& x);
Tensor nat_log_backward(const Tensor& grad, const Tensor& x);

Tensor clip(const Tensor& x, double lo, double hi);
/// Gradient passes through only where x was strictly inside [lo, hi].
Tensor clip_backward(const Tensor& grad, const Tensor& x, double lo, double hi);

Tensor concat_cols(const Tensor& a, const Tensor& b);
std::pair<Tensor, Tensor> concat_cols_backward(const Tensor& grad, std::size_t cols_a);

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape);

/// Tile a [1 x c] row into [r x c].
Tensor tile_rows(const Tensor& x, std::size_t r);
Tensor tile_rows_backward(const Tensor& grad);

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);
Tensor slice_cols_backward(const Tensor& grad, std::size_t orig_cols, std::size_t begin);

double reduce_sum(const Tensor& x);
Tensor reduce_sum_backward(double grad, const std::vector<std::size_t>& shape);
double reduce_mean(const Tensor& x);
Tensor reduce_mean_backward(double grad, const std::vector<std::size_t>& shape);

}  // namespace num

inline constexpr double kProbClip = 1e-7;

struct BceResult {
  double loss;
  Tensor grad;  // dloss / dp, same shape as p
};

/// Mean binary cross-entropy over the batch; p is clipped into
/// [kProbClip, 1 - kProbClip] before the log.
BceResult bce_loss(const Tensor& p, const Tensor& y);

}  // namespace dndf

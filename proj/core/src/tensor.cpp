#include "dndf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dndf {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

void require_rank2(const Tensor& t, const char* who) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(who) + ": expected rank-2 tensor, got shape " + t.shape_str());
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* who) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(who) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
  if (data.size() != shape_product(shape)) {
    throw ShapeError("Tensor: data size " + std::to_string(data.size()) +
                     " does not match shape " + shape_str());
  }
}

Tensor Tensor::zeros(std::vector<std::size_t> s) {
  std::vector<double> d(shape_product(s), 0.0);
  return Tensor(std::move(s), std::move(d));
}

Tensor Tensor::full(std::vector<std::size_t> s, double value) {
  std::vector<double> d(shape_product(s), value);
  return Tensor(std::move(s), std::move(d));
}

Tensor Tensor::row_vector(std::vector<double> d) {
  const std::size_t n = d.size();
  return Tensor({n}, std::move(d));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> d) {
  return Tensor({rows, cols}, std::move(d));
}

std::size_t Tensor::rows() const {
  if (rank() == 0) return 0;
  return shape[0];
}

std::size_t Tensor::cols() const {
  if (rank() == 1) return shape[0];
  if (rank() == 2) return shape[1];
  throw ShapeError("Tensor::cols: rank " + std::to_string(rank()) + " unsupported");
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace num {

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul lhs");
  require_rank2(b, "matmul rhs");
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: lhs " + a.shape_str() + " incompatible with rhs " + b.shape_str());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor out = Tensor::zeros({n, m});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a.data[i * k + p];
      if (av == 0.0) continue;
      const double* brow = &b.data[p * m];
      double* orow = &out.data[i * m];
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

std::pair<Tensor, Tensor> matmul_backward(const Tensor& grad, const Tensor& a, const Tensor& b) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  if (grad.rank() != 2 || grad.rows() != n || grad.cols() != m) {
    throw ShapeError("matmul_backward: grad " + grad.shape_str() + " does not match output [" +
                     std::to_string(n) + "x" + std::to_string(m) + "]");
  }
  Tensor da = Tensor::zeros({n, k});
  Tensor db = Tensor::zeros({k, m});
  // da = grad * b^T ; db = a^T * grad
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double g = grad.data[i * m + j];
      if (g == 0.0) continue;
      for (std::size_t p = 0; p < k; ++p) {
        da.data[i * k + p] += g * b.data[p * m + j];
        db.data[p * m + j] += g * a.data[i * k + p];
      }
    }
  }
  return {std::move(da), std::move(db)};
}

Tensor add_rowvec(const Tensor& a, const Tensor& v) {
  require_rank2(a, "add_rowvec lhs");
  if (v.rank() != 1 || v.shape[0] != a.cols()) {
    throw ShapeError("add_rowvec: lhs " + a.shape_str() + " vs vector " + v.shape_str());
  }
  Tensor out = a;
  const std::size_t m = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < m; ++j) out.data[i * m + j] += v.data[j];
  }
  return out;
}

std::pair<Tensor, Tensor> add_rowvec_backward(const Tensor& grad) {
  require_rank2(grad, "add_rowvec_backward");
  Tensor dv = Tensor::zeros({grad.cols()});
  const std::size_t m = grad.cols();
  for (std::size_t i = 0; i < grad.rows(); ++i) {
    for (std::size_t j = 0; j < m; ++j) dv.data[j] += grad.data[i * m + j];
  }
  return {grad, std::move(dv)};
}

Tensor multiply(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "multiply");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= b.data[i];
  return out;
}

std::pair<Tensor, Tensor> multiply_backward(const Tensor& grad, const Tensor& a, const Tensor& b) {
  require_same_shape(grad, a, "multiply_backward");
  Tensor da = grad, db = grad;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    da.data[i] *= b.data[i];
    db.data[i] *= a.data[i];
  }
  return {std::move(da), std::move(db)};
}

Tensor sigmoid(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.data) {
    // Split on sign to avoid exp overflow.
    v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  return out;
}

Tensor sigmoid_backward(const Tensor& grad, const Tensor& y) {
  require_same_shape(grad, y, "sigmoid_backward");
  Tensor dx = grad;
  for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] *= y.data[i] * (1.0 - y.data[i]);
  return dx;
}

Tensor softmax_rows(const Tensor& x) {
  require_rank2(x, "softmax_rows");
  Tensor out = x;
  const std::size_t m = x.cols();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double* row = &out.data[i * m];
    const double mx = *std::max_element(row, row + m);
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (std::size_t j = 0; j < m; ++j) row[j] /= sum;
  }
  return out;
}

Tensor softmax_rows_backward(const Tensor& grad, const Tensor& y) {
  require_same_shape(grad, y, "softmax_rows_backward");
  Tensor dx = grad;
  const std::size_t m = y.cols();
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const double* g = &grad.data[i * m];
    const double* s = &y.data[i * m];
    double dot = 0.0;
    for (std::size_t j = 0; j < m; ++j) dot += g[j] * s[j];
    double* d = &dx.data[i * m];
    for (std::size_t j = 0; j < m; ++j) d[j] = s[j] * (g[j] - dot);
  }
  return dx;
}

Tensor nat_log(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.data) {
    if (v <= 0.0) throw NumericError("nat_log: non-positive input " + std::to_string(v));
    v = std::log(v);
  }
  return out;
}

Tensor nat_log_backward(const Tensor& grad, const Tensor& x) {
  require_same_shape(grad, x, "nat_log_backward");
  Tensor dx = grad;
  for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] /= x.data[i];
  return dx;
}

Tensor clip(const Tensor& x, double lo, double hi) {
  Tensor out = x;
  for (double& v : out.data) v = std::clamp(v, lo, hi);
  return out;
}

Tensor clip_backward(const Tensor& grad, const Tensor& x, double lo, double hi) {
  require_same_shape(grad, x, "clip_backward");
  Tensor dx = grad;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (x.data[i] <= lo || x.data[i] >= hi) dx.data[i] = 0.0;
  }
  return dx;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require_rank2(a, "concat_cols lhs");
  require_rank2(b, "concat_cols rhs");
  if (a.rows() != b.rows()) {
    throw ShapeError("concat_cols: row mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
  const std::size_t n = a.rows(), ca = a.cols(), cb = b.cols();
  Tensor out = Tensor::zeros({n, ca + cb});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(&a.data[i * ca], ca, &out.data[i * (ca + cb)]);
    std::copy_n(&b.data[i * cb], cb, &out.data[i * (ca + cb) + ca]);
  }
  return out;
}

std::pair<Tensor, Tensor> concat_cols_backward(const Tensor& grad, std::size_t cols_a) {
  require_rank2(grad, "concat_cols_backward");
  if (cols_a > grad.cols()) throw ShapeError("concat_cols_backward: cols_a out of range");
  const std::size_t n = grad.rows(), c = grad.cols(), cb = c - cols_a;
  Tensor da = Tensor::zeros({n, cols_a});
  Tensor db = Tensor::zeros({n, cb});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(&grad.data[i * c], cols_a, &da.data[i * cols_a]);
    std::copy_n(&grad.data[i * c + cols_a], cb, &db.data[i * cb]);
  }
  return {std::move(da), std::move(db)};
}

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape) {
  if (shape_product(shape) != x.size()) {
    throw ShapeError("reshape: cannot reshape " + x.shape_str() + " to requested size");
  }
  return Tensor(std::move(shape), x.data);
}

Tensor tile_rows(const Tensor& x, std::size_t r) {
  require_rank2(x, "tile_rows");
  if (x.rows() != 1) throw ShapeError("tile_rows: input must be [1 x c], got " + x.shape_str());
  const std::size_t c = x.cols();
  Tensor out = Tensor::zeros({r, c});
  for (std::size_t i = 0; i < r; ++i) std::copy_n(x.data.data(), c, &out.data[i * c]);
  return out;
}

Tensor tile_rows_backward(const Tensor& grad) {
  require_rank2(grad, "tile_rows_backward");
  const std::size_t c = grad.cols();
  Tensor dx = Tensor::zeros({1, c});
  for (std::size_t i = 0; i < grad.rows(); ++i) {
    for (std::size_t j = 0; j < c; ++j) dx.data[j] += grad.data[i * c + j];
  }
  return dx;
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  require_rank2(x, "slice_cols");
  if (begin > end || end > x.cols()) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") invalid for " + x.shape_str());
  }
  const std::size_t n = x.rows(), c = x.cols(), w = end - begin;
  Tensor out = Tensor::zeros({n, w});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(&x.data[i * c + begin], w, &out.data[i * w]);
  }
  return out;
}

Tensor slice_cols_backward(const Tensor& grad, std::size_t orig_cols, std::size_t begin) {
  require_rank2(grad, "slice_cols_backward");
  const std::size_t n = grad.rows(), w = grad.cols();
  if (begin + w > orig_cols) throw ShapeError("slice_cols_backward: slice exceeds original width");
  Tensor dx = Tensor::zeros({n, orig_cols});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(&grad.data[i * w], w, &dx.data[i * orig_cols + begin]);
  }
  return dx;
}

double reduce_sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data) s += v;
  return s;
}

Tensor reduce_sum_backward(double grad, const std::vector<std::size_t>& shape) {
  return Tensor::full(shape, grad);
}

double reduce_mean(const Tensor& x) {
  if (x.size() == 0) throw ShapeError("reduce_mean: empty tensor");
  return reduce_sum(x) / static_cast<double>(x.size());
}

Tensor reduce_mean_backward(double grad, const std::vector<std::size_t>& shape) {
  Tensor t = Tensor::full(shape, grad);
  const double n = static_cast<double>(t.size());
  for (double& v : t.data) v /= n;
  return t;
}

}  // namespace num

BceResult bce_loss(const Tensor& p, const Tensor& y) {
  if (!p.same_shape(y)) {
    throw ShapeError("bce_loss: p " + p.shape_str() + " vs y " + y.shape_str());
  }
  if (p.size() == 0) throw ShapeError("bce_loss: empty input");
  const double n = static_cast<double>(p.size());
  double loss = 0.0;
  Tensor grad = p;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pc = std::clamp(p.data[i], kProbClip, 1.0 - kProbClip);
    const double yi = y.data[i];
    loss += -(yi * std::log(pc) + (1.0 - yi) * std::log(1.0 - pc));
    grad.data[i] = (pc - yi) / (pc * (1.0 - pc)) / n;
  }
  return {loss / n, std::move(grad)};
}

}  // namespace dndf

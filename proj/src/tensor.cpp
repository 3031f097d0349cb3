#include "riskformer/tensor.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "riskformer/errors.hpp"

namespace riskformer {

namespace {

void check_dims(int rows, int cols) {
  if (rows < 0 || cols < 0) {
    throw ShapeError("tensor dimensions must be non-negative, got " + std::to_string(rows) +
                     "x" + std::to_string(cols));
  }
}

void check_length(int rows, int cols, std::size_t n) {
  if (n != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw ShapeError("tensor data length " + std::to_string(n) + " does not match shape " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

Tensor2::Tensor2(int rows, int cols) : rows_(rows), cols_(cols) {
  check_dims(rows, cols);
  data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Tensor2::Tensor2(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  check_dims(rows, cols);
  check_length(rows, cols, data_.size());
  for (double v : data_) {
    if (!std::isfinite(v)) {
      throw ContractError("tensor entries must be finite");
    }
  }
}

Tensor2 Tensor2::full(int rows, int cols, double value) {
  if (!std::isfinite(value)) throw ContractError("tensor entries must be finite");
  Tensor2 t(rows, cols);
  t.data_.assign(t.data_.size(), value);
  return t;
}

Tensor2 Tensor2::identity(int n) {
  Tensor2 t(n, n);
  for (int i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

Tensor2 Tensor2::with_sentinels(int rows, int cols, std::vector<double> values) {
  check_dims(rows, cols);
  check_length(rows, cols, values.size());
  for (double v : values) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw ContractError("only -inf sentinels are permitted as non-finite entries");
    }
  }
  Tensor2 t;
  t.rows_ = rows;
  t.cols_ = cols;
  t.data_ = std::move(values);
  return t;
}

Tensor2 Tensor2::unchecked(int rows, int cols, std::vector<double> values) {
  check_dims(rows, cols);
  check_length(rows, cols, values.size());
  Tensor2 t;
  t.rows_ = rows;
  t.cols_ = cols;
  t.data_ = std::move(values);
  return t;
}

std::string Tensor2::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: dimension mismatch " + a.shape_str() + " * " + b.shape_str());
  }
  Tensor2 c(a.rows(), b.cols());
  const int m = a.rows(), k = a.cols(), n = b.cols();
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  for (int i = 0; i < m; ++i) {
    const double* arow = pa + static_cast<std::size_t>(i) * k;
    double* crow = pc + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = pb + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: dimension mismatch " + a.shape_str() + " * (" + b.shape_str() +
                     ")^T");
  }
  Tensor2 c(a.rows(), b.rows());
  const int m = a.rows(), k = a.cols(), n = b.rows();
  for (int i = 0; i < m; ++i) {
    const double* arow = a.data() + static_cast<std::size_t>(i) * k;
    double* crow = c.data() + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* brow = b.data() + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] = acc;
    }
  }
  return c;
}

Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_tn: dimension mismatch (" + a.shape_str() + ")^T * " +
                     b.shape_str());
  }
  Tensor2 c(a.cols(), b.cols());
  const int m = a.cols(), k = a.rows(), n = b.cols();
  for (int i = 0; i < k; ++i) {
    const double* arow = a.data() + static_cast<std::size_t>(i) * m;
    const double* brow = b.data() + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < m; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* crow = c.data() + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

}  // namespace riskformer

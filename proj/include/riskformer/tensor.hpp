#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace riskformer {

// Dense row-major 2-D tensor of 64-bit floats. Checked constructors reject
// non-finite entries; tape-internal results use the unchecked factory and the
// -inf masking sentinel uses with_sentinels (NaN and +inf stay rejected).
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(int rows, int cols);  // zeros
  Tensor2(int rows, int cols, std::vector<double> values);

  static Tensor2 full(int rows, int cols, double value);
  static Tensor2 identity(int n);
  static Tensor2 with_sentinels(int rows, int cols, std::vector<double> values);
  static Tensor2 unchecked(int rows, int cols, std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  const double* data() const { return data_.data(); }
  double* data() { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  bool same_shape(const Tensor2& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool operator==(const Tensor2& other) const = default;

  std::string shape_str() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Kernels used by the tape. matmul_nt computes A·Bᵀ, matmul_tn computes Aᵀ·B;
// both avoid materializing the transpose.
Tensor2 matmul(const Tensor2& a, const Tensor2& b);
Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b);
Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b);

}  // namespace riskformer

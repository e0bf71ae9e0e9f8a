#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace esc::nn {

/// Dense row-major matrix of doubles. Batches are stored one sample per row.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  /// Takes ownership of `data`, which must hold rows * cols values.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  void fill(double value);
  bool all_finite() const noexcept;
  std::string shape_string() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Kernels used by the dense layers. All accumulate in a fixed loop order, so
// each output row depends only on the matching input row and results are
// bitwise reproducible.

/// out = in * weightᵀ + bias, with in (B x n), weight (m x n), bias (m).
void affine_forward(const Matrix& in, const Matrix& weight, std::span<const double> bias,
                    Matrix& out);

/// grad_weight = grad_outᵀ * in, grad_bias = column sums of grad_out.
/// Rows are accumulated in ascending order.
void affine_backward_params(const Matrix& grad_out, const Matrix& in, Matrix& grad_weight,
                            std::span<double> grad_bias);

/// grad_in = grad_out * weight.
void affine_backward_input(const Matrix& grad_out, const Matrix& weight, Matrix& grad_in);

}  // namespace esc::nn

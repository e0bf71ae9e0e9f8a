#include "esc/nn/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "esc/error.hpp"

namespace esc::nn {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("Matrix: " + std::to_string(data_.size()) + " values for shape " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Matrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void affine_forward(const Matrix& in, const Matrix& weight, std::span<const double> bias,
                    Matrix& out) {
  const std::size_t batch = in.rows();
  const std::size_t n_in = in.cols();
  const std::size_t n_out = weight.rows();
  if (weight.cols() != n_in || bias.size() != n_out) {
    throw ShapeError("affine_forward: input " + in.shape_string() + " vs weight " +
                     weight.shape_string());
  }
  if (out.rows() != batch || out.cols() != n_out) out = Matrix(batch, n_out);

  // Walk the transposed weight so the innermost loop runs over contiguous
  // outputs. Row b of `out` depends only on row b of `in`.
  thread_local std::vector<double> transposed;
  transposed.resize(n_in * n_out);
  for (std::size_t o = 0; o < n_out; ++o) {
    const double* w = weight.data() + o * n_in;
    for (std::size_t k = 0; k < n_in; ++k) transposed[k * n_out + o] = w[k];
  }
  const double* wt = transposed.data();
  for (std::size_t b = 0; b < batch; ++b) {
    const double* x = in.data() + b * n_in;
    double* y = out.data() + b * n_out;
    std::fill(y, y + n_out, 0.0);
    for (std::size_t k = 0; k < n_in; ++k) {
      const double xk = x[k];
      const double* wk = wt + k * n_out;
      for (std::size_t o = 0; o < n_out; ++o) y[o] += xk * wk[o];
    }
    for (std::size_t o = 0; o < n_out; ++o) y[o] += bias[o];
  }
}

void affine_backward_params(const Matrix& grad_out, const Matrix& in, Matrix& grad_weight,
                            std::span<double> grad_bias) {
  const std::size_t batch = in.rows();
  const std::size_t n_in = in.cols();
  const std::size_t n_out = grad_out.cols();
  if (grad_out.rows() != batch || grad_weight.rows() != n_out || grad_weight.cols() != n_in ||
      grad_bias.size() != n_out) {
    throw ShapeError("affine_backward_params: grad_out " + grad_out.shape_string() +
                     " vs input " + in.shape_string());
  }
  grad_weight.fill(0.0);
  std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* g = grad_out.data() + b * n_out;
    const double* x = in.data() + b * n_in;
    for (std::size_t o = 0; o < n_out; ++o) {
      const double go = g[o];
      grad_bias[o] += go;
      if (go == 0.0) continue;
      double* gw = grad_weight.data() + o * n_in;
      for (std::size_t k = 0; k < n_in; ++k) gw[k] += go * x[k];
    }
  }
}

void affine_backward_input(const Matrix& grad_out, const Matrix& weight, Matrix& grad_in) {
  const std::size_t batch = grad_out.rows();
  const std::size_t n_out = grad_out.cols();
  const std::size_t n_in = weight.cols();
  if (weight.rows() != n_out) {
    throw ShapeError("affine_backward_input: grad_out " + grad_out.shape_string() +
                     " vs weight " + weight.shape_string());
  }
  if (grad_in.rows() != batch || grad_in.cols() != n_in) grad_in = Matrix(batch, n_in);
  grad_in.fill(0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* g = grad_out.data() + b * n_out;
    double* gx = grad_in.data() + b * n_in;
    for (std::size_t o = 0; o < n_out; ++o) {
      const double go = g[o];
      if (go == 0.0) continue;
      const double* w = weight.data() + o * n_in;
      for (std::size_t k = 0; k < n_in; ++k) gx[k] += go * w[k];
    }
  }
}

}  // namespace esc::nn

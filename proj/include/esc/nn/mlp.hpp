#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "esc/nn/matrix.hpp"

namespace esc::nn {

enum class Activation : std::uint8_t { Linear = 0, Gelu = 1 };

std::string to_string(Activation a);

/// Standard normal CDF via the C library's erf (a few ulp on glibc).
double normal_cdf(double x) noexcept;
/// Exact GELU, x * Phi(x).
double gelu(double x) noexcept;
/// d/dx gelu(x) = Phi(x) + x * phi(x).
double gelu_derivative(double x) noexcept;

enum class InitScheme : std::uint8_t {
  /// W ~ U(-a, a) with a = sqrt(6 / (fan_in + fan_out)), biases zero.
  GlorotUniform = 0,
};

/// Weights and biases of a fully connected network.
///
/// Layer i maps layer_dims[i] -> layer_dims[i+1] and applies activations[i].
/// Hidden layers default to GELU and the output layer is always linear; a
/// hidden layer may also be linear (the baseline net's bottleneck).
struct MlpParams {
  std::vector<std::size_t> layer_dims;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  std::vector<Activation> activations;

  std::size_t layer_count() const noexcept { return weights.size(); }
  std::size_t input_dim() const noexcept { return layer_dims.front(); }
  std::size_t output_dim() const noexcept { return layer_dims.back(); }
  std::size_t parameter_count() const noexcept;

  /// Throws ShapeError when the invariants between the fields are violated.
  void validate() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Per-layer parameter gradients, shaped like MlpParams (also used for Adam moments).
struct MlpGrads {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  static MlpGrads zeros_like(const MlpParams& params);
  /// this += other, layer by layer.
  void accumulate(const MlpGrads& other);
  void scale(double factor);
  double squared_norm() const noexcept;

  friend bool operator==(const MlpGrads&, const MlpGrads&) = default;
};

/// GELU on every hidden layer, linear output.
std::vector<Activation> default_activations(std::size_t layer_count);

MlpParams init_params(const std::vector<std::size_t>& layer_dims, std::uint64_t seed,
                      InitScheme scheme = InitScheme::GlorotUniform,
                      std::vector<Activation> activations = {});

/// Activations of every layer for one batch; enough for exact backprop.
struct ForwardCache {
  /// inputs[i] is the input to layer i (inputs[0] is the batch itself).
  std::vector<Matrix> inputs;
  /// pre_activations[i] = inputs[i] * W_iᵀ + b_i.
  std::vector<Matrix> pre_activations;
  /// Phi(pre_activations[i]) for GELU layers, empty for linear ones.
  std::vector<Matrix> gates;
};

struct ForwardResult {
  Matrix output;
  ForwardCache cache;
};

struct BackwardResult {
  MlpGrads grads;
  Matrix grad_input;
};

ForwardResult mlp_forward(const MlpParams& params, const Matrix& batch);

/// Forward pass that keeps no cache.
Matrix mlp_predict(const MlpParams& params, const Matrix& batch);

/// Gradients of the scalar loss whose derivative w.r.t. the network output is
/// `grad_out`, with respect to every parameter and to the input batch.
BackwardResult mlp_backward(const MlpParams& params, const ForwardCache& cache,
                            const Matrix& grad_out);

/// Flattened parameter view in layer order (W_0, b_0, W_1, b_1, ...).
std::vector<double> flatten(const MlpParams& params);
std::vector<double> flatten(const MlpGrads& grads);
void assign_flat(MlpParams& params, std::span<const double> values);

}  // namespace esc::nn

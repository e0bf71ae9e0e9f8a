#include "esc/nn/mlp.hpp"

#include <cmath>
#include <numbers>

#include "esc/error.hpp"
#include "esc/rng.hpp"

namespace esc::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Linear:
      return "linear";
    case Activation::Gelu:
      return "gelu";
  }
  return "unknown";
}

namespace {

constexpr double kInvSqrt2Pi = std::numbers::inv_sqrtpi / std::numbers::sqrt2;

double gelu_derivative_from_cdf(double x, double cdf) noexcept {
  return cdf + x * std::exp(-0.5 * x * x) * kInvSqrt2Pi;
}

}  // namespace

double normal_cdf(double x) noexcept {
  return 0.5 * (1.0 + std::erf(x * (std::numbers::sqrt2 / 2.0)));
}

double gelu(double x) noexcept { return x * normal_cdf(x); }

double gelu_derivative(double x) noexcept {
  return gelu_derivative_from_cdf(x, normal_cdf(x));
}

std::size_t MlpParams::parameter_count() const noexcept {
  std::size_t n = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) n += weights[i].size() + biases[i].size();
  return n;
}

void MlpParams::validate() const {
  if (layer_dims.size() < 2) throw ShapeError("MlpParams: need at least input and output dims");
  const std::size_t layers = layer_dims.size() - 1;
  if (weights.size() != layers || biases.size() != layers || activations.size() != layers) {
    throw ShapeError("MlpParams: expected " + std::to_string(layers) + " layers");
  }
  for (std::size_t i = 0; i < layers; ++i) {
    if (weights[i].rows() != layer_dims[i + 1] || weights[i].cols() != layer_dims[i] ||
        biases[i].size() != layer_dims[i + 1]) {
      throw ShapeError("MlpParams: layer " + std::to_string(i) + " has weight " +
                       weights[i].shape_string() + ", expected " +
                       std::to_string(layer_dims[i + 1]) + "x" + std::to_string(layer_dims[i]));
    }
  }
  if (activations.back() != Activation::Linear) {
    throw ShapeError("MlpParams: output layer must be linear");
  }
}

MlpGrads MlpGrads::zeros_like(const MlpParams& params) {
  MlpGrads g;
  for (std::size_t i = 0; i < params.layer_count(); ++i) {
    g.weights.emplace_back(params.weights[i].rows(), params.weights[i].cols());
    g.biases.emplace_back(params.biases[i].size(), 0.0);
  }
  return g;
}

void MlpGrads::accumulate(const MlpGrads& other) {
  if (other.weights.size() != weights.size()) throw ShapeError("MlpGrads: layer count mismatch");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    auto dst = weights[i].flat();
    auto src = other.weights[i].flat();
    if (dst.size() != src.size() || biases[i].size() != other.biases[i].size()) {
      throw ShapeError("MlpGrads: shape mismatch at layer " + std::to_string(i));
    }
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    for (std::size_t k = 0; k < biases[i].size(); ++k) biases[i][k] += other.biases[i][k];
  }
}

void MlpGrads::scale(double factor) {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (double& v : weights[i].flat()) v *= factor;
    for (double& v : biases[i]) v *= factor;
  }
}

double MlpGrads::squared_norm() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (double v : weights[i].flat()) s += v * v;
    for (double v : biases[i]) s += v * v;
  }
  return s;
}

std::vector<Activation> default_activations(std::size_t layer_count) {
  std::vector<Activation> acts(layer_count, Activation::Gelu);
  if (!acts.empty()) acts.back() = Activation::Linear;
  return acts;
}

MlpParams init_params(const std::vector<std::size_t>& layer_dims, std::uint64_t seed,
                      InitScheme scheme, std::vector<Activation> activations) {
  if (layer_dims.size() < 2) throw ConfigError("init_params: need at least two layer dims");
  for (std::size_t i = 0; i < layer_dims.size(); ++i) {
    if (layer_dims[i] == 0) {
      throw ConfigError("init_params: layer dim " + std::to_string(i) + " is zero");
    }
  }
  const std::size_t layers = layer_dims.size() - 1;
  if (activations.empty()) activations = default_activations(layers);
  if (activations.size() != layers) {
    throw ConfigError("init_params: " + std::to_string(activations.size()) +
                      " activations for " + std::to_string(layers) + " layers");
  }

  MlpParams p;
  p.layer_dims = layer_dims;
  p.activations = std::move(activations);
  Rng rng = Rng::stream(seed, Stream::Init);
  for (std::size_t i = 0; i < layers; ++i) {
    const std::size_t fan_in = layer_dims[i];
    const std::size_t fan_out = layer_dims[i + 1];
    Matrix w(fan_out, fan_in);
    switch (scheme) {
      case InitScheme::GlorotUniform: {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& v : w.flat()) v = rng.uniform(-limit, limit);
        break;
      }
    }
    p.weights.push_back(std::move(w));
    p.biases.emplace_back(fan_out, 0.0);
  }
  p.validate();
  return p;
}

namespace {

// Writes the activation of `pre` into `post`; for GELU also stores Phi(pre)
// in `gate` when one is supplied.
void apply_activation(Activation act, const Matrix& pre, Matrix& post, Matrix* gate) {
  if (post.rows() != pre.rows() || post.cols() != pre.cols()) post = Matrix(pre.rows(), pre.cols());
  auto src = pre.flat();
  auto dst = post.flat();
  switch (act) {
    case Activation::Linear:
      std::copy(src.begin(), src.end(), dst.begin());
      break;
    case Activation::Gelu:
      if (gate == nullptr) {
        for (std::size_t k = 0; k < src.size(); ++k) dst[k] = gelu(src[k]);
        break;
      }
      *gate = Matrix(pre.rows(), pre.cols());
      for (std::size_t k = 0; k < src.size(); ++k) {
        const double cdf = normal_cdf(src[k]);
        gate->flat()[k] = cdf;
        dst[k] = src[k] * cdf;
      }
      break;
  }
}

void check_input(const MlpParams& params, const Matrix& batch) {
  if (batch.cols() != params.input_dim()) {
    throw ShapeError("mlp_forward: layer 0 expects " + std::to_string(params.input_dim()) +
                     " inputs, batch is " + batch.shape_string());
  }
}

}  // namespace

ForwardResult mlp_forward(const MlpParams& params, const Matrix& batch) {
  check_input(params, batch);
  const std::size_t layers = params.layer_count();
  ForwardResult result;
  auto& cache = result.cache;
  cache.inputs.resize(layers);
  cache.pre_activations.resize(layers);
  cache.gates.resize(layers);
  cache.inputs[0] = batch;
  for (std::size_t i = 0; i < layers; ++i) {
    affine_forward(cache.inputs[i], params.weights[i], params.biases[i], cache.pre_activations[i]);
    Matrix& next = (i + 1 < layers) ? cache.inputs[i + 1] : result.output;
    apply_activation(params.activations[i], cache.pre_activations[i], next, &cache.gates[i]);
  }
  return result;
}

Matrix mlp_predict(const MlpParams& params, const Matrix& batch) {
  check_input(params, batch);
  Matrix current = batch;
  Matrix pre;
  for (std::size_t i = 0; i < params.layer_count(); ++i) {
    affine_forward(current, params.weights[i], params.biases[i], pre);
    apply_activation(params.activations[i], pre, current, nullptr);
  }
  return current;
}

BackwardResult mlp_backward(const MlpParams& params, const ForwardCache& cache,
                            const Matrix& grad_out) {
  const std::size_t layers = params.layer_count();
  if (cache.inputs.size() != layers || cache.pre_activations.size() != layers ||
      cache.gates.size() != layers) {
    throw ShapeError("mlp_backward: cache has " + std::to_string(cache.inputs.size()) +
                     " layers, params have " + std::to_string(layers));
  }
  const Matrix& last = cache.pre_activations.back();
  if (grad_out.rows() != last.rows() || grad_out.cols() != last.cols()) {
    throw ShapeError("mlp_backward: grad_out " + grad_out.shape_string() + " vs output " +
                     last.shape_string());
  }

  BackwardResult result;
  result.grads = MlpGrads::zeros_like(params);
  Matrix delta = grad_out;
  for (std::size_t li = layers; li-- > 0;) {
    const Matrix& pre = cache.pre_activations[li];
    if (pre.cols() != params.weights[li].rows() || cache.inputs[li].cols() != params.weights[li].cols()) {
      throw ShapeError("mlp_backward: cache does not match params at layer " + std::to_string(li));
    }
    if (params.activations[li] == Activation::Gelu) {
      auto d = delta.flat();
      auto z = pre.flat();
      auto cdf = cache.gates[li].flat();
      if (cdf.size() != z.size()) {
        throw ShapeError("mlp_backward: missing GELU gate at layer " + std::to_string(li));
      }
      for (std::size_t k = 0; k < d.size(); ++k) d[k] *= gelu_derivative_from_cdf(z[k], cdf[k]);
    }
    affine_backward_params(delta, cache.inputs[li], result.grads.weights[li],
                           result.grads.biases[li]);
    Matrix upstream;
    affine_backward_input(delta, params.weights[li], upstream);
    delta = std::move(upstream);
  }
  result.grad_input = std::move(delta);
  return result;
}

std::vector<double> flatten(const MlpParams& params) {
  std::vector<double> out;
  out.reserve(params.parameter_count());
  for (std::size_t i = 0; i < params.layer_count(); ++i) {
    auto w = params.weights[i].flat();
    out.insert(out.end(), w.begin(), w.end());
    out.insert(out.end(), params.biases[i].begin(), params.biases[i].end());
  }
  return out;
}

std::vector<double> flatten(const MlpGrads& grads) {
  std::vector<double> out;
  for (std::size_t i = 0; i < grads.weights.size(); ++i) {
    auto w = grads.weights[i].flat();
    out.insert(out.end(), w.begin(), w.end());
    out.insert(out.end(), grads.biases[i].begin(), grads.biases[i].end());
  }
  return out;
}

void assign_flat(MlpParams& params, std::span<const double> values) {
  if (values.size() != params.parameter_count()) {
    throw ShapeError("assign_flat: " + std::to_string(values.size()) + " values for " +
                     std::to_string(params.parameter_count()) + " parameters");
  }
  std::size_t pos = 0;
  for (std::size_t i = 0; i < params.layer_count(); ++i) {
    for (double& v : params.weights[i].flat()) v = values[pos++];
    for (double& v : params.biases[i]) v = values[pos++];
  }
}

}  // namespace esc::nn

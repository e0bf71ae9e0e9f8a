#include "esc/nn/adam.hpp"

#include <cmath>

#include "esc/error.hpp"

namespace esc::nn {

AdamState AdamState::fresh(const MlpParams& params, AdamHyper hyper) {
  AdamState s;
  s.m = MlpGrads::zeros_like(params);
  s.v = MlpGrads::zeros_like(params);
  s.hyper = hyper;
  return s;
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::uint64_t t, const AdamHyper& hyper, double lr) {
  const double b1 = hyper.beta1;
  const double b2 = hyper.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grads[k];
    m[k] = b1 * m[k] + (1.0 - b1) * g;
    v[k] = b2 * v[k] + (1.0 - b2) * g * g;
    const double m_hat = m[k] / c1;
    const double v_hat = v[k] / c2;
    params[k] -= lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
  }
}

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state, double lr) {
  if (!(lr > 0.0)) throw ConfigError("adam_step: learning rate must be positive");
  const std::size_t layers = params.layer_count();
  if (grads.weights.size() != layers || state.m.weights.size() != layers ||
      state.v.weights.size() != layers) {
    throw ShapeError("adam_step: layer count mismatch");
  }
  for (std::size_t i = 0; i < layers; ++i) {
    if (grads.weights[i].size() != params.weights[i].size() ||
        grads.biases[i].size() != params.biases[i].size() ||
        state.m.weights[i].size() != params.weights[i].size() ||
        state.v.weights[i].size() != params.weights[i].size()) {
      throw ShapeError("adam_step: shape mismatch at layer " + std::to_string(i));
    }
    bool finite = grads.weights[i].all_finite();
    for (double g : grads.biases[i]) finite = finite && std::isfinite(g);
    if (!finite) {
      throw OptimizerError("adam_step: non-finite gradient in layer " + std::to_string(i), i);
    }
  }

  ++state.t;
  for (std::size_t i = 0; i < layers; ++i) {
    adam_update(params.weights[i].flat(), grads.weights[i].flat(), state.m.weights[i].flat(),
                state.v.weights[i].flat(), state.t, state.hyper, lr);
    adam_update(params.biases[i], grads.biases[i], state.m.biases[i], state.v.biases[i], state.t,
                state.hyper, lr);
  }
}

}  // namespace esc::nn

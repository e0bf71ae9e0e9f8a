#include "esc/nn/finite_diff.hpp"

#include <algorithm>
#include <cmath>

#include "esc/error.hpp"

namespace esc::nn {

std::vector<double> finite_diff_grad_at(const FlatLoss& loss, std::span<const double> theta,
                                        std::span<const std::size_t> coords, double step) {
  if (!(step > 0.0)) throw ConfigError("finite_diff_grad: step must be positive");
  std::vector<double> work(theta.begin(), theta.end());
  std::vector<double> grad;
  grad.reserve(coords.size());
  for (std::size_t k : coords) {
    if (k >= work.size()) throw ShapeError("finite_diff_grad_at: coordinate out of range");
    const double original = work[k];
    work[k] = original + step;
    const double up = loss(work);
    work[k] = original - step;
    const double down = loss(work);
    work[k] = original;
    grad.push_back((up - down) / (2.0 * step));
  }
  return grad;
}

std::vector<double> finite_diff_grad(const FlatLoss& loss, std::span<const double> theta,
                                     double step) {
  std::vector<std::size_t> all(theta.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  return finite_diff_grad_at(loss, theta, all, step);
}

MlpGrads finite_diff_grad(const std::function<double(const MlpParams&)>& loss,
                          const MlpParams& params, double step) {
  MlpParams probe = params;
  const std::vector<double> theta = flatten(params);
  const auto flat = finite_diff_grad(
      [&](std::span<const double> values) {
        assign_flat(probe, values);
        return loss(probe);
      },
      theta, step);

  MlpGrads out = MlpGrads::zeros_like(params);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < out.weights.size(); ++i) {
    for (double& v : out.weights[i].flat()) v = flat[pos++];
    for (double& v : out.biases[i]) v = flat[pos++];
  }
  return out;
}

double max_relative_error(std::span<const double> analytic, std::span<const double> numeric,
                          double floor) {
  if (analytic.size() != numeric.size()) throw ShapeError("max_relative_error: length mismatch");
  double worst = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    const double a = analytic[k];
    const double n = numeric[k];
    const double denom = std::max({floor, std::abs(a), std::abs(n)});
    worst = std::max(worst, std::abs(a - n) / denom);
  }
  return worst;
}

}  // namespace esc::nn

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "esc/nn/mlp.hpp"

namespace esc::nn {

using FlatLoss = std::function<double(std::span<const double>)>;

/// Central differences (f(θ + h e_k) − f(θ − h e_k)) / 2h for every coordinate.
/// Test oracle only: costs two loss evaluations per parameter.
std::vector<double> finite_diff_grad(const FlatLoss& loss, std::span<const double> theta,
                                     double step);

/// Central differences at the listed coordinates only, in the given order.
std::vector<double> finite_diff_grad_at(const FlatLoss& loss, std::span<const double> theta,
                                        std::span<const std::size_t> coords, double step);

/// Same, over the parameters of an MLP; result is shaped like the network.
MlpGrads finite_diff_grad(const std::function<double(const MlpParams&)>& loss,
                          const MlpParams& params, double step);

/// max_k |a_k − b_k| / max(floor, |a_k|, |b_k|). The floor keeps entries whose
/// true gradient is ~0 from turning rounding noise into huge ratios.
double max_relative_error(std::span<const double> analytic, std::span<const double> numeric,
                          double floor = 1e-6);

}  // namespace esc::nn

#pragma once

#include <cstdint>
#include <span>

#include "esc/nn/mlp.hpp"

namespace esc::nn {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment buffers shaped like the parameters they track.
struct AdamState {
  MlpGrads m;
  MlpGrads v;
  std::uint64_t t = 0;
  AdamHyper hyper;

  static AdamState fresh(const MlpParams& params, AdamHyper hyper = {});

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// Elementwise bias-corrected Adam update on flat buffers. `t` is the step
/// number after incrementing (first step is 1).
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::uint64_t t, const AdamHyper& hyper, double lr);

/// One Adam step over every layer. Throws OptimizerError naming the first
/// layer with a non-finite gradient; params and state are untouched then.
void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state, double lr);

}  // namespace esc::nn

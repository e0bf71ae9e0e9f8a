#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esc/data/config.hpp"
#include "esc/nn/mlp.hpp"
#include "esc/rng.hpp"

namespace esc::train {

/// Outcome of comparing analytic gradients with central finite differences.
struct GradCheckResult {
  std::string name;
  std::size_t parameters = 0;  // total parameter count
  std::size_t checked = 0;     // coordinates compared (parameters and inputs)
  double max_rel_error = 0.0;

  bool passed(double tol) const noexcept { return max_rel_error <= tol; }
};

struct GradCheckOptions {
  double step = 1e-5;
  std::size_t batch = 4;
  /// Upper bound on finite-difference coordinates, applied to the parameters
  /// and to the inputs separately; a random subset is taken for larger nets.
  /// 0 means no limit.
  std::size_t max_coords = 0;
};

/// Checks mlp_backward on loss 0.5 * ||f(X) - T||^2 for a random batch X and
/// target T drawn from `rng`, over parameters and the input batch.
GradCheckResult check_mlp_gradients(const std::string& name, const nn::MlpParams& params,
                                    const GradCheckOptions& opt, Rng& rng);

/// Checks the joint (feature, policy) gradient of the ESC batch MSE on
/// random observations with random labels (vehicle counts 1..max_set_size).
GradCheckResult check_esc_gradients(const std::string& name, const nn::MlpParams& feature,
                                    const nn::MlpParams& policy, std::size_t max_set_size,
                                    const GradCheckOptions& opt, Rng& rng);

/// Preset-shaped nets (feature, policy, baseline at M = N) plus the joint
/// ESC pipeline, initialized from `seed`.
std::vector<GradCheckResult> grad_check_config(const data::ExperimentConfig& cfg, std::uint64_t seed,
                                               const GradCheckOptions& opt);

}  // namespace esc::train

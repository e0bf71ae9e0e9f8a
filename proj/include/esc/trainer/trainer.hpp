#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "esc/data/config.hpp"
#include "esc/data/dataset.hpp"
#include "esc/nn/adam.hpp"
#include "esc/nn/mlp.hpp"
#include "esc/rng.hpp"

namespace esc::train {

using data::Method;

/// A policy together with its state representation. ESC carries a feature
/// net; AP and FP consume flat concatenations of a fixed number of vehicles.
struct Model {
  Method method = Method::Esc;
  std::optional<nn::MlpParams> feature;
  nn::MlpParams policy;
  /// Vehicles per observation for AP/FP (0 for ESC).
  std::size_t set_size = 0;

  friend bool operator==(const Model&, const Model&) = default;
};

/// Freshly initialized networks for `method` under `cfg`, seeded by `seed`.
Model make_model(const data::ExperimentConfig& cfg, Method method, std::uint64_t seed);

/// Predictions for the given samples. AP draws one permutation per sample
/// from `perm_rng`, which must be non-null for AP.
std::vector<double> predict(const Model& model, const data::Dataset& ds,
                            std::span<const std::size_t> indices, Rng* perm_rng);

/// Mean-squared-error loss of one batch and its gradients.
struct BatchGradients {
  double loss = 0.0;
  std::optional<nn::MlpGrads> feature;
  nn::MlpGrads policy;
};

BatchGradients batch_gradients(const Model& model, const data::Dataset& ds,
                               std::span<const std::size_t> indices, Rng* perm_rng);

/// sqrt(mean (prediction - label)^2) over the whole set. AP uses one
/// permutation per sample drawn from a stream fixed by `eval_seed`.
double evaluate_rmse(const Model& model, const data::Dataset& test_set, std::uint64_t eval_seed);

struct TracePoint {
  std::size_t iteration = 0;
  double train_loss = 0.0;
  double test_rmse = 0.0;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

struct RunMetrics {
  Method method = Method::Esc;
  /// Set-size case of the test data, e.g. "M=4".
  std::string case_label;
  /// Set-size case of the training data; differs from case_label for a
  /// variable-M model evaluated at a fixed M.
  std::string trained_on;
  int benchmark_id = 0;
  std::uint64_t seed = 0;
  std::vector<TracePoint> trace;
  double final_rmse = 0.0;
  double wall_seconds = 0.0;
  /// Set when the run aborted; trace then holds the points reached.
  std::optional<std::string> failure;

  /// "ESC", "FP", "AP", or "ESC_var" for a cross-evaluated variable-M model.
  std::string method_label() const;
};

/// Additional test sets evaluated at every trace point (e.g. a model trained
/// on variable M evaluated at fixed M).
struct CrossEval {
  std::string case_label;
  const data::Dataset* test_set = nullptr;
  std::vector<TracePoint> trace;
};

struct TrainResult {
  Model model;
  std::optional<nn::AdamState> feature_adam;
  nn::AdamState policy_adam;
  RunMetrics metrics;
};

/// Runs cfg.iterations Adam steps on the batch MSE. Test RMSE is recorded
/// after 0 steps, every cfg.eval_interval steps and after the final step.
/// Shuffled epochs wrap around. Throws DivergenceError on a non-finite loss.
TrainResult train(const data::ExperimentConfig& cfg, const data::Dataset& train_set,
                  const data::Dataset& test_set, Method method, std::uint64_t seed,
                  std::vector<CrossEval>* cross_evals = nullptr);

/// Like train(), but a diverged run is returned with metrics.failure set and
/// the trace points reached so far instead of throwing.
TrainResult train_recorded(const data::ExperimentConfig& cfg, const data::Dataset& train_set,
                           const data::Dataset& test_set, Method method, std::uint64_t seed,
                           std::vector<CrossEval>* cross_evals = nullptr);

}  // namespace esc::train

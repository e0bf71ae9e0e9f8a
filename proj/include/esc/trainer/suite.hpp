#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "esc/data/config.hpp"
#include "esc/data/dataset.hpp"
#include "esc/nn/mlp.hpp"
#include "esc/trainer/trainer.hpp"

namespace esc::train {

/// Generator seeds of the train and test sets of one (benchmark, case) cell.
/// Derived from cfg.data_seed, so every cell gets independent data and the
/// same cell always gets the same data.
struct DataSeeds {
  std::uint64_t train = 0;
  std::uint64_t test = 0;
};
DataSeeds data_seeds(const data::ExperimentConfig& cfg, int benchmark_id, const data::SetSize& size);

/// cfg with benchmark_id and set_size replaced by the cell's values.
data::ExperimentConfig cell_config(const data::ExperimentConfig& cfg, int benchmark_id,
                                   const data::SetSize& size);

/// Mean and sample standard deviation of the final RMSE of one
/// (benchmark, case, method) cell. Failed runs are excluded from the
/// statistics and counted in `failed`.
struct SuiteRow {
  int benchmark_id = 0;
  std::string case_label;
  std::string method;  // ESC, FP, AP or ESC_var
  std::optional<double> mean_rmse;
  std::optional<double> std_rmse;  // 0 when only one seed succeeded
  std::size_t seeds = 0;           // successful runs
  std::size_t failed = 0;
};

struct SuiteResult {
  std::vector<SuiteRow> rows;
  /// Every run in matrix order (benchmark, case, method, seed), followed for
  /// each variable-M ESC run by its cross-evaluations at the fixed cases.
  std::vector<RunMetrics> runs;
};

struct SuiteOptions {
  std::size_t jobs = 1;
  /// Called once per finished run (from worker threads, serialized).
  std::function<void(const RunMetrics&)> on_run_done;
};

/// Trains every applicable (benchmark, case, method, seed) combination of
/// the suite matrix in cfg. AP and FP are skipped for the variable case; a
/// variable-M ESC model is additionally evaluated on the test set of every
/// fixed case of the same benchmark. Runs that fail are recorded and the
/// suite continues. Output is independent of `jobs`.
SuiteResult run_experiment_suite(const data::ExperimentConfig& cfg, const SuiteOptions& options = {});

/// Mean and sample standard deviation (n - 1 denominator; 0 for n = 1).
std::pair<double, double> mean_and_std(std::span<const double> values);

/// Distance between the states at j = 1 + eps and j = 1 - eps along
/// X = {[j, 2], [1, 5]} with an empty x_else.
struct DiscontinuityRow {
  double eps = 0.0;
  double fp_jump = 0.0;
  double esc_diff = 0.0;
  double ratio = 0.0;  // fp_jump / esc_diff (infinity when esc_diff is 0)
};

/// `feature_params` must take 2 inputs. Throws ConfigError on eps <= 0.
std::vector<DiscontinuityRow> discontinuity_demo(std::span<const double> eps_list,
                                                 const nn::MlpParams& feature_params);

}  // namespace esc::train

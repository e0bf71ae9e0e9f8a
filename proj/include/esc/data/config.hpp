#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace esc::data {

enum class Method : std::uint8_t { Esc, Fp, Ap };

std::string to_string(Method m);
Method parse_method(const std::string& text);

/// Set size regime of an experiment case: a fixed M, or M uniform on [1, N].
struct SetSize {
  bool variable = false;
  std::size_t fixed_m = 1;

  static SetSize fixed(std::size_t m) { return {false, m}; }
  static SetSize any() { return {true, 0}; }

  /// "M=4" or "M=1..N".
  std::string label(std::size_t max_set_size) const;
  /// Header tag in dataset files: 0 for variable, otherwise M.
  std::uint32_t tag() const noexcept { return variable ? 0u : static_cast<std::uint32_t>(fixed_m); }
  static SetSize from_tag(std::uint32_t tag);

  friend bool operator==(const SetSize&, const SetSize&) = default;
};

/// Hidden layer widths of the three networks.
///
/// ESC uses a feature net d1 -> feature_hidden -> d3 and a policy net
/// (d3 + d2) -> policy_hidden -> 1. The AP/FP baseline net is
/// (M d1 + d2) -> baseline_hidden -> 1 where hidden layer
/// `baseline_linear_layer` has no activation (the bottleneck of width d3).
struct Architecture {
  std::vector<std::size_t> feature_hidden;
  std::vector<std::size_t> policy_hidden;
  std::vector<std::size_t> baseline_hidden;
  std::size_t baseline_linear_layer = 0;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct ExperimentConfig {
  std::string preset = "desk";

  std::size_t d1 = 3;
  std::size_t d2 = 4;
  std::size_t d3 = 19;
  std::size_t max_set_size = 6;  // N
  double c_min = -5.0;
  double c_max = 5.0;
  SetSize set_size = SetSize::fixed(4);
  int benchmark_id = 1;
  Method method = Method::Esc;

  std::size_t train_size = 20000;
  std::size_t test_size = 2048;
  std::size_t batch_size = 128;
  double learning_rate = 3e-4;
  std::size_t iterations = 2000;
  std::size_t eval_interval = 50;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::uint64_t data_seed = 20220101;
  std::uint64_t eval_seed = 7;

  Architecture architecture;
  /// Accept d3 < N d1 + 1 for ESC (logged as a warning).
  bool allow_small_d3 = false;

  // Experiment matrix for suites.
  std::vector<int> suite_benchmarks{1, 3};
  std::vector<SetSize> suite_cases;
  std::vector<Method> suite_methods{Method::Esc, Method::Fp, Method::Ap};

  /// Throws ConfigError on violated invariants. Returns warnings.
  std::vector<std::string> validate() const;

  /// Default virtual vehicle: every coordinate at c_max.
  std::vector<double> default_pad() const { return std::vector<double>(d1, c_max); }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Reduced-scale profile: d1=3, d2=4, N=6, 2x64 ESC nets, d3=19,
/// 5-layer baseline with a linear 19-unit middle layer, 20k/2048 samples,
/// batch 128, lr 3e-4, 2000 iterations, 3 seeds.
ExperimentConfig desk_preset();
/// Published scale: d1=5, d2=10, N=20, 5x256 ESC nets, d3=101, 11-layer
/// baseline with a linear 101-unit middle layer, 1e6/2048 samples,
/// batch 512, lr 8e-5, 3000 iterations, 5 seeds.
ExperimentConfig paper_preset();
ExperimentConfig preset(const std::string& name);

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Every key must be known; missing keys keep the values of `base`.
ExperimentConfig from_json(const nlohmann::json& j, const ExperimentConfig& base);

/// Applies "key=value"; value is parsed as JSON, falling back to a string.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

}  // namespace esc::data

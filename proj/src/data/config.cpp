#include "esc/data/config.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <set>

#include "esc/error.hpp"

namespace esc::data {

using nlohmann::json;

std::string to_string(Method m) {
  switch (m) {
    case Method::Esc:
      return "ESC";
    case Method::Fp:
      return "FP";
    case Method::Ap:
      return "AP";
  }
  return "?";
}

Method parse_method(const std::string& text) {
  std::string upper = text;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "ESC") return Method::Esc;
  if (upper == "FP") return Method::Fp;
  if (upper == "AP") return Method::Ap;
  throw ConfigError("unknown method \"" + text + "\" (expected ESC, FP or AP)");
}

std::string SetSize::label(std::size_t max_set_size) const {
  if (variable) return "M=1.." + std::to_string(max_set_size);
  return "M=" + std::to_string(fixed_m);
}

SetSize SetSize::from_tag(std::uint32_t tag) { return tag == 0 ? any() : fixed(tag); }

namespace {

std::string set_size_text(const SetSize& s) {
  return s.variable ? "variable" : "M=" + std::to_string(s.fixed_m);
}

SetSize parse_set_size(const json& j) {
  if (j.is_number_unsigned() || j.is_number_integer()) {
    const auto m = j.get<long long>();
    if (m < 1) throw ConfigError("set size must be >= 1");
    return SetSize::fixed(static_cast<std::size_t>(m));
  }
  if (!j.is_string()) throw ConfigError("set size must be a number, \"M=<k>\" or \"variable\"");
  const auto text = j.get<std::string>();
  if (text == "variable" || text.rfind("M=1..", 0) == 0) return SetSize::any();
  std::string digits = text.rfind("M=", 0) == 0 ? text.substr(2) : text;
  try {
    std::size_t used = 0;
    const long long m = std::stoll(digits, &used);
    if (used != digits.size() || m < 1) throw ConfigError("");
    return SetSize::fixed(static_cast<std::size_t>(m));
  } catch (const std::exception&) {
    throw ConfigError("cannot parse set size \"" + text + "\"");
  }
}

std::vector<std::size_t> repeat(std::size_t width, std::size_t count) {
  return std::vector<std::size_t>(count, width);
}

}  // namespace

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> warnings;
  if (!(c_min < c_max)) throw ConfigError("config: c_min must be < c_max");
  if (d1 == 0 || d2 == 0 || d3 == 0) throw ConfigError("config: d1, d2, d3 must be positive");
  if (max_set_size == 0) throw ConfigError("config: max_set_size (N) must be >= 1");
  if (max_set_size > 65535) throw ConfigError("config: max_set_size exceeds file format limit");
  auto check_size = [&](const SetSize& s) {
    if (!s.variable && (s.fixed_m < 1 || s.fixed_m > max_set_size)) {
      throw ConfigError("config: fixed M=" + std::to_string(s.fixed_m) + " outside [1, N=" +
                        std::to_string(max_set_size) + "]");
    }
  };
  check_size(set_size);
  for (const auto& s : suite_cases) check_size(s);
  if (benchmark_id < 1 || benchmark_id > 6) throw ConfigError("config: benchmark_id must be 1..6");
  for (int b : suite_benchmarks) {
    if (b < 1 || b > 6) throw ConfigError("config: suite benchmark ids must be 1..6");
  }
  if (train_size == 0 || test_size == 0) throw ConfigError("config: dataset sizes must be >= 1");
  if (batch_size == 0) throw ConfigError("config: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("config: learning_rate must be > 0");
  if (eval_interval == 0) throw ConfigError("config: eval_interval must be >= 1");
  if (seeds.empty()) throw ConfigError("config: need at least one seed");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("config: duplicate seeds");
  }
  const auto& a = architecture;
  for (const auto* widths : {&a.feature_hidden, &a.policy_hidden, &a.baseline_hidden}) {
    if (std::find(widths->begin(), widths->end(), std::size_t{0}) != widths->end()) {
      throw ConfigError("config: zero-width hidden layer");
    }
  }
  if (!a.baseline_hidden.empty() && a.baseline_linear_layer >= a.baseline_hidden.size()) {
    throw ConfigError("config: baseline_linear_layer out of range");
  }
  if (method != Method::Esc && set_size.variable) {
    throw ConfigError("config: " + to_string(method) + " requires a fixed set size");
  }
  const std::size_t needed = max_set_size * d1 + 1;
  if (d3 < needed) {
    const std::string msg = "config: d3=" + std::to_string(d3) + " < N*d1+1=" +
                            std::to_string(needed) + "; sum pooling may not be injective";
    if (!allow_small_d3) throw ConfigError(msg + " (set allow_small_d3 to override)");
    warnings.push_back(msg);
  }
  return warnings;
}

ExperimentConfig desk_preset() {
  ExperimentConfig c;
  c.preset = "desk";
  c.d1 = 3;
  c.d2 = 4;
  c.max_set_size = 6;
  c.d3 = c.max_set_size * c.d1 + 1;
  c.c_min = -5.0;
  c.c_max = 5.0;
  c.set_size = SetSize::fixed(4);
  c.train_size = 20000;
  c.test_size = 2048;
  c.batch_size = 128;
  c.learning_rate = 3e-4;
  c.iterations = 2000;
  c.eval_interval = 50;
  c.seeds = {1, 2, 3};
  c.architecture.feature_hidden = repeat(64, 2);
  c.architecture.policy_hidden = repeat(64, 2);
  c.architecture.baseline_hidden = {64, 64, c.d3, 64, 64};
  c.architecture.baseline_linear_layer = 2;
  c.suite_benchmarks = {1, 3};
  c.suite_cases = {SetSize::fixed(2), SetSize::fixed(4), SetSize::any()};
  c.suite_methods = {Method::Esc, Method::Fp, Method::Ap};
  return c;
}

ExperimentConfig paper_preset() {
  ExperimentConfig c;
  c.preset = "paper";
  c.d1 = 5;
  c.d2 = 10;
  c.max_set_size = 20;
  c.d3 = c.max_set_size * c.d1 + 1;
  c.c_min = -5.0;
  c.c_max = 5.0;
  c.set_size = SetSize::fixed(5);
  c.train_size = 1000000;
  c.test_size = 2048;
  c.batch_size = 512;
  c.learning_rate = 8e-5;
  c.iterations = 3000;
  c.eval_interval = 50;
  c.seeds = {1, 2, 3, 4, 5};
  c.architecture.feature_hidden = repeat(256, 5);
  c.architecture.policy_hidden = repeat(256, 5);
  c.architecture.baseline_hidden = repeat(256, 11);
  c.architecture.baseline_hidden[5] = c.d3;
  c.architecture.baseline_linear_layer = 5;
  c.suite_benchmarks = {1, 2, 3, 4, 5, 6};
  c.suite_cases = {SetSize::fixed(5), SetSize::fixed(10), SetSize::fixed(15),
                   SetSize::fixed(20), SetSize::any()};
  c.suite_methods = {Method::Esc, Method::Fp, Method::Ap};
  return c;
}

ExperimentConfig preset(const std::string& name) {
  if (name == "desk") return desk_preset();
  if (name == "paper") return paper_preset();
  throw ConfigError("unknown preset \"" + name + "\" (expected desk or paper)");
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["d1"] = c.d1;
  j["d2"] = c.d2;
  j["d3"] = c.d3;
  j["max_set_size"] = c.max_set_size;
  j["c_min"] = c.c_min;
  j["c_max"] = c.c_max;
  j["set_size"] = set_size_text(c.set_size);
  j["benchmark_id"] = c.benchmark_id;
  j["method"] = to_string(c.method);
  j["train_size"] = c.train_size;
  j["test_size"] = c.test_size;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["iterations"] = c.iterations;
  j["eval_interval"] = c.eval_interval;
  j["seeds"] = c.seeds;
  j["data_seed"] = c.data_seed;
  j["eval_seed"] = c.eval_seed;
  j["feature_hidden"] = c.architecture.feature_hidden;
  j["policy_hidden"] = c.architecture.policy_hidden;
  j["baseline_hidden"] = c.architecture.baseline_hidden;
  j["baseline_linear_layer"] = c.architecture.baseline_linear_layer;
  j["allow_small_d3"] = c.allow_small_d3;
  j["suite_benchmarks"] = c.suite_benchmarks;
  json cases = json::array();
  for (const auto& s : c.suite_cases) cases.push_back(set_size_text(s));
  j["suite_cases"] = cases;
  json methods = json::array();
  for (Method m : c.suite_methods) methods.push_back(to_string(m));
  j["suite_methods"] = methods;
  return j;
}

ExperimentConfig from_json(const json& j, const ExperimentConfig& base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c = base;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "preset") c.preset = value.get<std::string>();
      else if (key == "d1") c.d1 = value.get<std::size_t>();
      else if (key == "d2") c.d2 = value.get<std::size_t>();
      else if (key == "d3") c.d3 = value.get<std::size_t>();
      else if (key == "max_set_size") c.max_set_size = value.get<std::size_t>();
      else if (key == "c_min") c.c_min = value.get<double>();
      else if (key == "c_max") c.c_max = value.get<double>();
      else if (key == "set_size") c.set_size = parse_set_size(value);
      else if (key == "benchmark_id") c.benchmark_id = value.get<int>();
      else if (key == "method") c.method = parse_method(value.get<std::string>());
      else if (key == "train_size") c.train_size = value.get<std::size_t>();
      else if (key == "test_size") c.test_size = value.get<std::size_t>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "iterations") c.iterations = value.get<std::size_t>();
      else if (key == "eval_interval") c.eval_interval = value.get<std::size_t>();
      else if (key == "seeds") c.seeds = value.get<std::vector<std::uint64_t>>();
      else if (key == "data_seed") c.data_seed = value.get<std::uint64_t>();
      else if (key == "eval_seed") c.eval_seed = value.get<std::uint64_t>();
      else if (key == "feature_hidden") c.architecture.feature_hidden = value.get<std::vector<std::size_t>>();
      else if (key == "policy_hidden") c.architecture.policy_hidden = value.get<std::vector<std::size_t>>();
      else if (key == "baseline_hidden") c.architecture.baseline_hidden = value.get<std::vector<std::size_t>>();
      else if (key == "baseline_linear_layer") c.architecture.baseline_linear_layer = value.get<std::size_t>();
      else if (key == "allow_small_d3") c.allow_small_d3 = value.get<bool>();
      else if (key == "suite_benchmarks") c.suite_benchmarks = value.get<std::vector<int>>();
      else if (key == "suite_cases") {
        c.suite_cases.clear();
        for (const auto& s : value) c.suite_cases.push_back(parse_set_size(s));
      } else if (key == "suite_methods") {
        c.suite_methods.clear();
        for (const auto& m : value) c.suite_methods.push_back(parse_method(m.get<std::string>()));
      } else {
        throw ConfigError("unknown config key \"" + key + "\"");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override \"" + assignment + "\" is not KEY=VALUE");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;
  cfg = from_json(json{{key, value}}, cfg);
}

}  // namespace esc::data

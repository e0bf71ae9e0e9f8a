#include "esc/trainer/suite.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "esc/error.hpp"
#include "esc/rng.hpp"
#include "esc/setrep/representation.hpp"

namespace esc::train {

namespace {

constexpr std::uint64_t kTestSetTag = 0x7E57;

// Runs job(0..count-1) on up to `jobs` threads. Each job writes only its own
// slot, so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& job) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  }
  for (auto& t : workers) t.join();
}

struct Cell {
  int benchmark_id = 0;
  data::SetSize size;
  data::Dataset train_set;
  data::Dataset test_set;
};

struct Job {
  std::size_t cell = 0;
  Method method = Method::Esc;
  std::uint64_t seed = 0;
  std::vector<std::size_t> cross_cells;  // fixed-M cells for a variable ESC run
};

struct JobOutput {
  RunMetrics metrics;
  std::vector<RunMetrics> cross;
};

RunMetrics failed_metrics(const Cell& cell, const data::ExperimentConfig& cfg, Method method,
                          std::uint64_t seed, const std::string& case_label, const std::string& why) {
  RunMetrics m;
  m.method = method;
  m.benchmark_id = cell.benchmark_id;
  m.seed = seed;
  m.case_label = case_label;
  m.trained_on = cell.size.label(cfg.max_set_size);
  m.failure = why;
  return m;
}

}  // namespace

DataSeeds data_seeds(const data::ExperimentConfig& cfg, int benchmark_id, const data::SetSize& size) {
  const std::uint64_t cell = derive_seed(derive_seed(cfg.data_seed, static_cast<std::uint64_t>(benchmark_id)),
                                         size.tag());
  return {cell, derive_seed(cell, kTestSetTag)};
}

data::ExperimentConfig cell_config(const data::ExperimentConfig& cfg, int benchmark_id,
                                   const data::SetSize& size) {
  data::ExperimentConfig c = cfg;
  c.benchmark_id = benchmark_id;
  c.set_size = size;
  return c;
}

std::pair<double, double> mean_and_std(std::span<const double> values) {
  if (values.empty()) throw ConfigError("mean_and_std: no values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

SuiteResult run_experiment_suite(const data::ExperimentConfig& cfg, const SuiteOptions& options) {
  cfg.validate();
  if (cfg.suite_benchmarks.empty() || cfg.suite_cases.empty() || cfg.suite_methods.empty()) {
    throw ConfigError("suite: benchmarks, cases and methods must all be non-empty");
  }
  if (cfg.seeds.empty()) throw ConfigError("suite: no seeds");

  std::vector<Cell> cells;
  for (int b : cfg.suite_benchmarks) {
    for (const auto& size : cfg.suite_cases) cells.push_back({b, size, {}, {}});
  }
  parallel_for(cells.size(), options.jobs, [&](std::size_t i) {
    Cell& c = cells[i];
    const auto ccfg = cell_config(cfg, c.benchmark_id, c.size);
    const auto seeds = data_seeds(cfg, c.benchmark_id, c.size);
    c.train_set = data::generate_dataset(ccfg, cfg.train_size, seeds.train, c.benchmark_id);
    c.test_set = data::generate_dataset(ccfg, cfg.test_size, seeds.test, c.benchmark_id);
  });

  std::vector<Job> jobs;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    for (Method method : cfg.suite_methods) {
      if (method != Method::Esc && cells[ci].size.variable) continue;
      for (std::uint64_t seed : cfg.seeds) {
        Job j{ci, method, seed, {}};
        if (cells[ci].size.variable) {
          for (std::size_t other = 0; other < cells.size(); ++other) {
            if (cells[other].benchmark_id == cells[ci].benchmark_id && !cells[other].size.variable) {
              j.cross_cells.push_back(other);
            }
          }
        }
        jobs.push_back(std::move(j));
      }
    }
  }

  std::vector<JobOutput> outputs(jobs.size());
  std::mutex report_mutex;
  parallel_for(jobs.size(), options.jobs, [&](std::size_t i) {
    const Job& job = jobs[i];
    const Cell& cell = cells[job.cell];
    const auto ccfg = cell_config(cfg, cell.benchmark_id, cell.size);
    std::vector<CrossEval> cross;
    for (std::size_t other : job.cross_cells) {
      cross.push_back({cells[other].size.label(cfg.max_set_size), &cells[other].test_set, {}});
    }
    JobOutput& out = outputs[i];
    try {
      out.metrics = train_recorded(ccfg, cell.train_set, cell.test_set, job.method, job.seed, &cross)
                        .metrics;
    } catch (const std::exception& e) {
      out.metrics = failed_metrics(cell, cfg, job.method, job.seed,
                                   cell.size.label(cfg.max_set_size), e.what());
    }
    for (const auto& ce : cross) {
      RunMetrics m;
      m.method = job.method;
      m.benchmark_id = cell.benchmark_id;
      m.seed = job.seed;
      m.case_label = ce.case_label;
      m.trained_on = out.metrics.trained_on;
      m.trace = ce.trace;
      if (!m.trace.empty()) m.final_rmse = m.trace.back().test_rmse;
      m.failure = out.metrics.failure;
      if (m.trace.empty() && !m.failure) m.failure = "no evaluation recorded";
      out.cross.push_back(std::move(m));
    }
    if (options.on_run_done) {
      std::lock_guard lock(report_mutex);
      options.on_run_done(out.metrics);
    }
  });

  SuiteResult result;
  for (auto& out : outputs) {
    result.runs.push_back(std::move(out.metrics));
    for (auto& m : out.cross) result.runs.push_back(std::move(m));
  }

  // Keyed aggregation: (benchmark, case, method label) -> final RMSEs in seed order.
  struct Acc {
    std::vector<double> values;
    std::size_t failed = 0;
  };
  std::map<std::tuple<int, std::string, std::string>, Acc> acc;
  for (const auto& m : result.runs) {
    auto& a = acc[{m.benchmark_id, m.case_label, m.method_label()}];
    if (m.failure) {
      ++a.failed;
    } else {
      a.values.push_back(m.final_rmse);
    }
  }

  const bool has_variable_esc =
      std::find(cfg.suite_methods.begin(), cfg.suite_methods.end(), Method::Esc) !=
          cfg.suite_methods.end() &&
      std::any_of(cfg.suite_cases.begin(), cfg.suite_cases.end(),
                  [](const data::SetSize& s) { return s.variable; });
  for (int b : cfg.suite_benchmarks) {
    for (const auto& size : cfg.suite_cases) {
      const std::string label = size.label(cfg.max_set_size);
      std::vector<std::string> methods;
      for (Method m : cfg.suite_methods) {
        if (m == Method::Esc || !size.variable) methods.push_back(to_string(m));
      }
      if (!size.variable && has_variable_esc) methods.push_back("ESC_var");
      for (const auto& method : methods) {
        const auto it = acc.find({b, label, method});
        SuiteRow row{b, label, method, std::nullopt, std::nullopt, 0, 0};
        if (it != acc.end()) {
          row.seeds = it->second.values.size();
          row.failed = it->second.failed;
          if (!it->second.values.empty()) {
            const auto [mean, sd] = mean_and_std(it->second.values);
            row.mean_rmse = mean;
            row.std_rmse = sd;
          }
        }
        result.rows.push_back(std::move(row));
      }
    }
  }
  return result;
}

std::vector<DiscontinuityRow> discontinuity_demo(std::span<const double> eps_list,
                                                 const nn::MlpParams& feature_params) {
  if (feature_params.input_dim() != 2) {
    throw ConfigError("discontinuity_demo: feature net must take 2 inputs, has " +
                      std::to_string(feature_params.input_dim()));
  }
  auto scene = [](double j) {
    return ObservationSet(std::vector<std::vector<double>>{{j, 2.0}, {1.0, 5.0}}, {});
  };
  auto distance = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  };
  std::vector<DiscontinuityRow> rows;
  for (double eps : eps_list) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
      throw ConfigError("discontinuity_demo: eps must be positive and finite");
    }
    const auto lo = scene(1.0 - eps);
    const auto hi = scene(1.0 + eps);
    DiscontinuityRow r;
    r.eps = eps;
    r.fp_jump = distance(fp_represent(hi).values, fp_represent(lo).values);
    r.esc_diff = distance(esc_represent(hi, feature_params).state.values,
                          esc_represent(lo, feature_params).state.values);
    r.ratio = r.esc_diff > 0.0 ? r.fp_jump / r.esc_diff : std::numeric_limits<double>::infinity();
    rows.push_back(r);
  }
  return rows;
}

}  // namespace esc::train

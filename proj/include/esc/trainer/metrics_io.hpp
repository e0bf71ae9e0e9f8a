#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "esc/data/config.hpp"
#include "esc/trainer/suite.hpp"
#include "esc/trainer/trainer.hpp"
#include "json.hpp"

namespace esc::train {

// Metrics files are JSON lines: one {"record":"eval", ...} object per trace
// point followed by one {"record":"summary", ...} object that carries the
// final RMSE, failure message, tool version and the resolved config.
// Wall-clock time is deliberately left out so reruns are byte-identical.

void write_metrics_jsonl(std::ostream& out, const RunMetrics& m, const data::ExperimentConfig& cfg);
void save_metrics(const std::filesystem::path& path, const RunMetrics& m,
                  const data::ExperimentConfig& cfg);

struct LoadedRun {
  RunMetrics metrics;
  nlohmann::json config;
  std::string version;
  std::string source;
};

/// Throws IoError on malformed lines, a missing summary, or eval records that
/// disagree with the summary.
LoadedRun read_metrics_jsonl(std::istream& in, const std::string& source);
LoadedRun load_metrics(const std::filesystem::path& path);

/// File-name friendly case label: "M=4" -> "M4", "M=1..6" -> "M1-6".
std::string case_file_tag(const std::string& case_label);

/// e.g. "b1_M4_ESC_s3.jsonl", "b1_M4_ESC_var_s3.jsonl", "b1_M1-6_ESC_s3.jsonl".
std::string metrics_file_name(const RunMetrics& m);

/// benchmark,case,method,mean_rmse,std_rmse,seeds,failed — one row per cell.
/// Cells without a successful run leave mean_rmse and std_rmse empty.
std::string suite_csv(const SuiteResult& result);

/// Rows, per-run final RMSEs and failures, version and config.
nlohmann::json suite_summary_json(const SuiteResult& result, const data::ExperimentConfig& cfg);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace esc::train

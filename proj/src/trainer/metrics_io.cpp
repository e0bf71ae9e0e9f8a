#include "esc/trainer/metrics_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>

#include "esc/error.hpp"
#include "esc/version.hpp"

namespace esc::train {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json run_identity(const RunMetrics& m) {
  json j;
  j["benchmark"] = m.benchmark_id;
  j["case"] = m.case_label;
  j["trained_on"] = m.trained_on;
  j["method"] = m.method_label();
  j["seed"] = m.seed;
  return j;
}

}  // namespace

std::string format_double(double v) { return json(v).dump(); }

void write_metrics_jsonl(std::ostream& out, const RunMetrics& m, const data::ExperimentConfig& cfg) {
  for (const auto& p : m.trace) {
    json j{{"record", "eval"}};
    j.update(run_identity(m));
    j["iteration"] = p.iteration;
    j["train_loss"] = number_or_null(p.train_loss);
    j["test_rmse"] = number_or_null(p.test_rmse);
    out << j.dump() << '\n';
  }
  json s{{"record", "summary"}};
  s.update(run_identity(m));
  s["final_rmse"] = m.trace.empty() ? json(nullptr) : number_or_null(m.final_rmse);
  s["eval_points"] = m.trace.size();
  s["failure"] = m.failure ? json(*m.failure) : json(nullptr);
  s["version"] = kVersion;
  s["config"] = data::to_json(cfg);
  out << s.dump() << '\n';
}

void save_metrics(const std::filesystem::path& path, const RunMetrics& m,
                  const data::ExperimentConfig& cfg) {
  std::ostringstream text;
  write_metrics_jsonl(text, m, cfg);
  write_text_file(path, text.str());
}

LoadedRun read_metrics_jsonl(std::istream& in, const std::string& source) {
  LoadedRun run;
  run.source = source;
  bool have_summary = false;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw IoError(source + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (have_summary) fail("content after the summary record");
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(std::string("not JSON: ") + e.what());
    }
    try {
      const std::string kind = j.at("record").get<std::string>();
      if (kind == "eval") {
        run.metrics.trace.push_back({j.at("iteration").get<std::size_t>(),
                                     number_from(j.at("train_loss")),
                                     number_from(j.at("test_rmse"))});
      } else if (kind == "summary") {
        have_summary = true;
        auto& m = run.metrics;
        m.benchmark_id = j.at("benchmark").get<int>();
        m.case_label = j.at("case").get<std::string>();
        m.trained_on = j.at("trained_on").get<std::string>();
        const std::string method = j.at("method").get<std::string>();
        m.method = data::parse_method(method == "ESC_var" ? "ESC" : method);
        m.seed = j.at("seed").get<std::uint64_t>();
        m.final_rmse = number_from(j.at("final_rmse"));
        if (!j.at("failure").is_null()) m.failure = j.at("failure").get<std::string>();
        if (j.at("eval_points").get<std::size_t>() != m.trace.size()) {
          fail("summary eval_points disagrees with the eval records");
        }
        run.version = j.at("version").get<std::string>();
        run.config = j.at("config");
      } else {
        fail("unknown record type \"" + kind + "\"");
      }
    } catch (const json::exception& e) {
      fail(std::string("bad record: ") + e.what());
    }
  }
  if (!have_summary) throw IoError(source + ": missing summary record");
  for (std::size_t i = 1; i < run.metrics.trace.size(); ++i) {
    if (run.metrics.trace[i].iteration <= run.metrics.trace[i - 1].iteration) {
      throw IoError(source + ": trace iterations are not increasing");
    }
  }
  return run;
}

LoadedRun load_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_metrics_jsonl(in, path.string());
}

std::string case_file_tag(const std::string& case_label) {
  std::string tag;
  for (std::size_t i = 0; i < case_label.size(); ++i) {
    const char c = case_label[i];
    if (c == '=') continue;
    if (c == '.' && i + 1 < case_label.size() && case_label[i + 1] == '.') {
      tag += '-';
      ++i;
      continue;
    }
    tag += c;
  }
  return tag;
}

std::string metrics_file_name(const RunMetrics& m) {
  return "b" + std::to_string(m.benchmark_id) + "_" + case_file_tag(m.case_label) + "_" +
         m.method_label() + "_s" + std::to_string(m.seed) + ".jsonl";
}

std::string suite_csv(const SuiteResult& result) {
  std::ostringstream out;
  out << "benchmark,case,method,mean_rmse,std_rmse,seeds,failed\n";
  for (const auto& r : result.rows) {
    out << r.benchmark_id << ',' << r.case_label << ',' << r.method << ','
        << (r.mean_rmse ? format_double(*r.mean_rmse) : "") << ','
        << (r.std_rmse ? format_double(*r.std_rmse) : "") << ',' << r.seeds << ',' << r.failed
        << '\n';
  }
  return out.str();
}

json suite_summary_json(const SuiteResult& result, const data::ExperimentConfig& cfg) {
  json rows = json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"benchmark", r.benchmark_id},
                    {"case", r.case_label},
                    {"method", r.method},
                    {"mean_rmse", r.mean_rmse ? json(*r.mean_rmse) : json(nullptr)},
                    {"std_rmse", r.std_rmse ? json(*r.std_rmse) : json(nullptr)},
                    {"seeds", r.seeds},
                    {"failed", r.failed}});
  }
  json runs = json::array();
  for (const auto& m : result.runs) {
    json j = run_identity(m);
    j["final_rmse"] = m.trace.empty() ? json(nullptr) : number_or_null(m.final_rmse);
    j["failure"] = m.failure ? json(*m.failure) : json(nullptr);
    j["metrics_file"] = metrics_file_name(m);
    runs.push_back(std::move(j));
  }
  return {{"version", kVersion}, {"config", data::to_json(cfg)}, {"rows", rows}, {"runs", runs}};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace esc::train

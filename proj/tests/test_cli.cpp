#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "esc_test_cli";

// Small settings so every invocation finishes in seconds.
const std::string kSmall =
    " --preset desk --set train_size=256 --set test_size=128 --set batch_size=32"
    " --set iterations=20 --set eval_interval=10 --set feature_hidden=[8] --set policy_hidden=[8]"
    " --set baseline_hidden=[8,19,8] --set baseline_linear_layer=1";

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" ESC_BENCH_EXE "\" " + args + " > \"" +
                          (kRoot / "last.log").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing " << p.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path fresh(const std::string& name) {
  const auto p = kRoot / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("cli: usage errors exit with 1") {
  fs::create_directories(kRoot);
  CHECK(run("gen-data") == 1);
  CHECK(run("--preset desk --set nonsense=3 gen-data") == 1);
  CHECK(run("--preset desk --set set_size=M=9 gen-data") == 1);
  CHECK(run("--preset galaxy gen-data") == 1);
  CHECK(run("--preset desk frobnicate") == 1);
  CHECK(run("--help") == 0);
}

TEST_CASE("cli: gen-data is byte-reproducible") {
  const auto a = fresh("gen_a"), b = fresh("gen_b");
  REQUIRE(run(kSmall + " --out " + a.string() + " gen-data") == 0);
  REQUIRE(run(kSmall + " --out " + b.string() + " gen-data") == 0);
  for (const char* f : {"train.escd", "test.escd", "dataset.json"}) CHECK(slurp(a / f) == slurp(b / f));
  const auto meta = nlohmann::json::parse(slurp(a / "dataset.json"));
  CHECK(meta.contains("version"));
  CHECK(meta["config"]["train_size"] == 256);
}

TEST_CASE("cli: train, eval and plot") {
  const auto d = fresh("train");
  REQUIRE(run(kSmall + " --out " + d.string() + " train") == 0);
  CHECK(fs::exists(d / "model" / "policy.mlp"));
  CHECK(fs::exists(d / "model" / "feature.mlp"));
  CHECK(fs::exists(d / "b1_M4_ESC_s1.jsonl"));
  REQUIRE(run(kSmall + " --out " + d.string() + " eval --model " + (d / "model").string()) == 0);
  const auto ev = nlohmann::json::parse(slurp(d / "eval.json"));
  // eval regenerates the same test set, so it reproduces the final RMSE
  std::ifstream metrics(d / "b1_M4_ESC_s1.jsonl");
  std::string line, last;
  while (std::getline(metrics, line)) last = line;
  CHECK(ev["rmse"] == nlohmann::json::parse(last)["final_rmse"]);

  const auto p = fresh("plot");
  REQUIRE(run("--out " + p.string() + " plot " + d.string()) == 0);
  CHECK(fs::exists(p / "b1_M4.svg"));
}

TEST_CASE("cli: suite rerun is byte-identical") {
  const std::string args = kSmall + " --set suite_benchmarks=[1] --set 'suite_cases=[2,\"variable\"]'";
  const auto a = fresh("suite_a"), b = fresh("suite_b");
  REQUIRE(run(args + " --jobs 2 --out " + a.string() + " suite") == 0);
  REQUIRE(run(args + " --jobs 1 --out " + b.string() + " suite") == 0);
  CHECK(slurp(a / "suite.csv") == slurp(b / "suite.csv"));
  CHECK(slurp(a / "suite_summary.json") == slurp(b / "suite_summary.json"));
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a / "runs")) {
    CHECK(slurp(e.path()) == slurp(b / "runs" / e.path().filename()));
    ++files;
  }
  CHECK(files == 3 * 3 + 3 + 3);  // fixed: 3 methods x 3 seeds; variable ESC; cross-evaluations
}

TEST_CASE("cli: diagnostics") {
  const auto d = fresh("diag");
  const std::string out = " --preset desk --out " + d.string();
  CHECK(run(out + " demo-discontinuity") == 0);
  const auto demo = nlohmann::json::parse(slurp(d / "discontinuity.json"));
  CHECK(demo.contains("rows"));
  CHECK(run(out + " grad-check --max-coords 200") == 0);
  CHECK(run(out + " injectivity --trials 2000") == 0);
  const auto inj = nlohmann::json::parse(slurp(d / "injectivity.json"));
  CHECK(inj.contains("config"));
}

TEST_CASE("cli: output directory falls back to ESC_BENCH_OUT") {
  const auto d = fresh("env");
  REQUIRE(run(kSmall + " gen-data", "ESC_BENCH_OUT=" + d.string()) == 0);
  CHECK(fs::exists(d / "train.escd"));
}

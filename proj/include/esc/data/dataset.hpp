#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "esc/data/config.hpp"
#include "esc/rng.hpp"
#include "esc/setrep/observation.hpp"

namespace esc::data {

struct Sample {
  ObservationSet obs;
  double label = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct DatasetHeader {
  std::uint32_t version = 1;
  std::uint32_t d1 = 0;
  std::uint32_t d2 = 0;
  std::uint32_t max_set_size = 0;
  SetSize set_size;
  std::uint32_t benchmark_id = 0;
  std::uint64_t sample_count = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const DatasetHeader&, const DatasetHeader&) = default;
};

struct Dataset {
  DatasetHeader header;
  std::vector<Sample> samples;

  std::size_t size() const noexcept { return samples.size(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Draws M per the configured regime, then every vehicle entry and every
/// x_else entry i.i.d. uniform on [c_min, c_max] (in that order).
ObservationSet sample_observation(const ExperimentConfig& cfg, Rng& rng);

/// `size` labelled samples; deterministic given `seed`. Uses the config's
/// dimensions and set_size; labels come from eval_benchmark(benchmark_id).
Dataset generate_dataset(const ExperimentConfig& cfg, std::size_t size, std::uint64_t seed,
                         int benchmark_id);

/// ESCD binary format (little-endian):
///   "ESCD", u32 version, u32 d1, u32 d2, u32 N, u32 set-size tag
///   (0 = variable, otherwise M), u32 benchmark id, u64 sample count,
///   u64 generator seed; then per sample: u16 M, M*d1 f64 vehicle entries,
///   d2 f64 x_else entries, f64 label.
void write_dataset(std::ostream& out, const Dataset& ds);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
/// With `audit`, every label is recomputed and a mismatch raises IoError.
Dataset load_dataset(const std::filesystem::path& path, bool audit = true);

/// Number of samples whose stored label differs (bitwise) from a fresh
/// evaluation of the benchmark.
std::size_t audit_labels(const Dataset& ds);

/// Sample indices of one batch plus cumulative vehicle offsets, so that the
/// vehicles of sample k occupy rows offsets[k] .. offsets[k+1] once stacked.
struct Batch {
  std::vector<std::size_t> indices;
  std::vector<std::size_t> offsets;
};

/// One shuffled pass over a dataset. The final batch may be short.
class BatchIterator {
 public:
  BatchIterator(const Dataset& ds, std::size_t batch_size, std::uint64_t epoch_seed);

  std::optional<Batch> next();
  const std::vector<std::size_t>& order() const noexcept { return order_; }

 private:
  const Dataset* ds_;
  std::size_t batch_size_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

}  // namespace esc::data

#include "esc/data/dataset.hpp"

#include <bit>
#include <fstream>

#include "esc/benchmarks/benchmarks.hpp"
#include "esc/binary_io.hpp"
#include "esc/error.hpp"
#include "esc/setrep/representation.hpp"

namespace esc::data {

ObservationSet sample_observation(const ExperimentConfig& cfg, Rng& rng) {
  const std::size_t m =
      cfg.set_size.variable ? 1 + static_cast<std::size_t>(rng.below(cfg.max_set_size))
                            : cfg.set_size.fixed_m;
  std::vector<double> vehicles(m * cfg.d1);
  for (double& v : vehicles) v = rng.uniform(cfg.c_min, cfg.c_max);
  std::vector<double> x_else(cfg.d2);
  for (double& v : x_else) v = rng.uniform(cfg.c_min, cfg.c_max);
  return ObservationSet(cfg.d1, std::move(vehicles), std::move(x_else));
}

Dataset generate_dataset(const ExperimentConfig& cfg, std::size_t size, std::uint64_t seed,
                         int benchmark_id) {
  if (size == 0) throw ConfigError("generate_dataset: size must be >= 1");
  const bench::BenchmarkId id(benchmark_id);
  Dataset ds;
  ds.header.d1 = static_cast<std::uint32_t>(cfg.d1);
  ds.header.d2 = static_cast<std::uint32_t>(cfg.d2);
  ds.header.max_set_size = static_cast<std::uint32_t>(cfg.max_set_size);
  ds.header.set_size = cfg.set_size;
  ds.header.benchmark_id = static_cast<std::uint32_t>(benchmark_id);
  ds.header.sample_count = size;
  ds.header.seed = seed;
  ds.samples.reserve(size);
  Rng rng = Rng::stream(seed, Stream::Data);
  for (std::size_t i = 0; i < size; ++i) {
    Sample s;
    s.obs = sample_observation(cfg, rng);
    s.label = bench::eval_benchmark(id, s.obs);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  if (ds.header.sample_count != ds.samples.size()) {
    throw IoError("write_dataset: header count disagrees with stored samples");
  }
  BinaryWriter w(out);
  const auto& h = ds.header;
  w.magic("ESCD");
  w.u32(h.version);
  w.u32(h.d1);
  w.u32(h.d2);
  w.u32(h.max_set_size);
  w.u32(h.set_size.tag());
  w.u32(h.benchmark_id);
  w.u64(h.sample_count);
  w.u64(h.seed);
  for (const Sample& s : ds.samples) {
    if (s.obs.d1() != h.d1 || s.obs.d2() != h.d2 || s.obs.vehicle_count() > h.max_set_size) {
      throw IoError("write_dataset: sample does not match header dimensions");
    }
    w.u16(static_cast<std::uint16_t>(s.obs.vehicle_count()));
    w.f64s(s.obs.vehicle_values());
    w.f64s(s.obs.x_else());
    w.f64(s.label);
  }
  if (!w.good()) throw IoError("write_dataset: stream error");
}

Dataset read_dataset(std::istream& in) {
  BinaryReader r(in, "dataset");
  r.expect_magic("ESCD");
  Dataset ds;
  auto& h = ds.header;
  h.version = r.u32();
  if (h.version != 1) throw IoError("dataset: unsupported version " + std::to_string(h.version));
  h.d1 = r.u32();
  h.d2 = r.u32();
  h.max_set_size = r.u32();
  h.set_size = SetSize::from_tag(r.u32());
  h.benchmark_id = r.u32();
  h.sample_count = r.u64();
  h.seed = r.u64();
  if (h.d1 == 0 || h.max_set_size == 0) throw IoError("dataset: zero dimension in header");
  for (std::uint64_t i = 0; i < h.sample_count; ++i) {
    const std::size_t m = r.u16();
    if (m == 0 || m > h.max_set_size) {
      throw IoError("dataset: sample " + std::to_string(i) + " has invalid size " +
                    std::to_string(m));
    }
    if (!h.set_size.variable && m != h.set_size.fixed_m) {
      throw IoError("dataset: sample " + std::to_string(i) + " violates fixed M");
    }
    std::vector<double> vehicles(m * h.d1);
    r.f64s(vehicles);
    std::vector<double> x_else(h.d2);
    r.f64s(x_else);
    Sample s{ObservationSet(h.d1, std::move(vehicles), std::move(x_else)), r.f64()};
    ds.samples.push_back(std::move(s));
  }
  if (!r.at_end()) throw IoError("dataset: trailing bytes after declared sample count");
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_dataset(out, ds);
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path, bool audit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Dataset ds;
  try {
    ds = read_dataset(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  if (audit) {
    const std::size_t bad = audit_labels(ds);
    if (bad != 0) {
      throw IoError(path.string() + ": " + std::to_string(bad) + " labels fail re-evaluation");
    }
  }
  return ds;
}

std::size_t audit_labels(const Dataset& ds) {
  const bench::BenchmarkId id(static_cast<int>(ds.header.benchmark_id));
  std::size_t bad = 0;
  for (const Sample& s : ds.samples) {
    const double fresh = bench::eval_benchmark(id, s.obs);
    if (std::bit_cast<std::uint64_t>(fresh) != std::bit_cast<std::uint64_t>(s.label)) ++bad;
  }
  return bad;
}

BatchIterator::BatchIterator(const Dataset& ds, std::size_t batch_size, std::uint64_t epoch_seed)
    : ds_(&ds), batch_size_(batch_size) {
  if (batch_size == 0) throw ConfigError("BatchIterator: batch_size must be >= 1");
  if (ds.samples.empty()) throw ConfigError("BatchIterator: empty dataset");
  Rng rng = Rng::stream(epoch_seed, Stream::Shuffle);
  order_ = sample_permutation(ds.samples.size(), rng);
}

std::optional<Batch> BatchIterator::next() {
  if (pos_ >= order_.size()) return std::nullopt;
  const std::size_t end = std::min(order_.size(), pos_ + batch_size_);
  Batch b;
  b.indices.assign(order_.begin() + static_cast<std::ptrdiff_t>(pos_),
                   order_.begin() + static_cast<std::ptrdiff_t>(end));
  b.offsets.reserve(b.indices.size() + 1);
  b.offsets.push_back(0);
  for (std::size_t idx : b.indices) {
    b.offsets.push_back(b.offsets.back() + ds_->samples[idx].obs.vehicle_count());
  }
  pos_ = end;
  return b;
}

}  // namespace esc::data

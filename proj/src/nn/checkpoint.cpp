#include "esc/nn/checkpoint.hpp"

#include <fstream>

#include "esc/binary_io.hpp"
#include "esc/error.hpp"

namespace esc::nn {

namespace {

void write_buffers(BinaryWriter& w, const MlpGrads& g) {
  for (std::size_t i = 0; i < g.weights.size(); ++i) {
    w.f64s(g.weights[i].flat());
    w.f64s(g.biases[i]);
  }
}

void read_buffers(BinaryReader& r, MlpGrads& g) {
  for (std::size_t i = 0; i < g.weights.size(); ++i) {
    r.f64s(g.weights[i].flat());
    r.f64s(g.biases[i]);
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const MlpParams& params, const AdamState& adam) {
  params.validate();
  BinaryWriter w(out);
  w.magic("MLP1");
  w.u32(static_cast<std::uint32_t>(params.layer_dims.size()));
  for (std::size_t d : params.layer_dims) w.u32(static_cast<std::uint32_t>(d));
  for (Activation a : params.activations) w.u8(static_cast<std::uint8_t>(a));
  for (std::size_t i = 0; i < params.layer_count(); ++i) {
    w.f64s(params.weights[i].flat());
    w.f64s(params.biases[i]);
  }
  w.u64(adam.t);
  write_buffers(w, adam.m);
  write_buffers(w, adam.v);
  if (!w.good()) throw IoError("write_checkpoint: stream error");
}

Checkpoint read_checkpoint(std::istream& in) {
  BinaryReader r(in, "checkpoint");
  r.expect_magic("MLP1");
  const std::uint32_t dim_count = r.u32();
  if (dim_count < 2 || dim_count > 4096) throw IoError("checkpoint: implausible layer count");
  Checkpoint ck;
  auto& p = ck.params;
  for (std::uint32_t i = 0; i < dim_count; ++i) {
    p.layer_dims.push_back(r.u32());
    if (p.layer_dims.back() == 0) throw IoError("checkpoint: zero-width layer");
  }
  for (std::uint32_t i = 0; i + 1 < dim_count; ++i) {
    const std::uint8_t tag = r.u8();
    if (tag > 1) throw IoError("checkpoint: unknown activation tag " + std::to_string(tag));
    p.activations.push_back(static_cast<Activation>(tag));
  }
  for (std::uint32_t i = 0; i + 1 < dim_count; ++i) {
    Matrix w(p.layer_dims[i + 1], p.layer_dims[i]);
    r.f64s(w.flat());
    std::vector<double> b(p.layer_dims[i + 1]);
    r.f64s(b);
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  try {
    p.validate();
  } catch (const ShapeError& e) {
    throw IoError(std::string("checkpoint: ") + e.what());
  }
  ck.adam = AdamState::fresh(p);
  ck.adam.t = r.u64();
  read_buffers(r, ck.adam.m);
  read_buffers(r, ck.adam.v);
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const MlpParams& params,
                     const AdamState& adam) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, params, adam);
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_checkpoint(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace esc::nn

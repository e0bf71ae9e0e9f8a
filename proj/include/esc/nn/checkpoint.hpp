#pragma once

#include <filesystem>
#include <iosfwd>

#include "esc/nn/adam.hpp"
#include "esc/nn/mlp.hpp"

namespace esc::nn {

/// Binary checkpoint of one network and its optimizer state.
///
/// Layout (little-endian):
///   "MLP1"
///   u32 dim count D, then D x u32 layer_dims
///   (D-1) x u8 activation tags (0 linear, 1 GELU)
///   per layer: weights row-major f64, then biases f64
///   u64 Adam step t, then m buffers, then v buffers (same order as params)
struct Checkpoint {
  MlpParams params;
  AdamState adam;
};

void write_checkpoint(std::ostream& out, const MlpParams& params, const AdamState& adam);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const MlpParams& params,
                     const AdamState& adam);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace esc::nn

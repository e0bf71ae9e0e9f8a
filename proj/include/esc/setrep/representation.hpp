#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "esc/nn/mlp.hpp"
#include "esc/rng.hpp"
#include "esc/setrep/observation.hpp"

namespace esc {

enum class StateLayout : std::uint8_t {
  Esc,   // d3 pooled encodings followed by x_else
  Flat,  // M * d1 concatenated vehicles followed by x_else
};

struct StateVector {
  std::vector<double> values;
  StateLayout layout = StateLayout::Flat;

  friend bool operator==(const StateVector&, const StateVector&) = default;
};

/// Vehicles of several observations stacked into one matrix, each
/// observation's rows contiguous and in canonical (lexicographic) order.
/// Rows offsets[b] .. offsets[b+1] belong to observation b.
struct SetBatch {
  nn::Matrix vehicles;
  std::vector<std::size_t> offsets;

  std::size_t batch_size() const noexcept { return offsets.empty() ? 0 : offsets.size() - 1; }
};

SetBatch make_set_batch(std::span<const ObservationSet* const> samples);

struct EscCache {
  nn::ForwardCache feature_cache;
  std::vector<std::size_t> offsets;
};

struct EscBatchResult {
  nn::Matrix x_set;  // batch_size x d3
  EscCache cache;
};

/// Encodes every vehicle with the feature net and sums encodings per
/// observation, in canonical row order.
EscBatchResult esc_forward_batch(const SetBatch& batch, const nn::MlpParams& feature_params);

/// Pools per-row encodings into per-observation sums. Rows are added in
/// ascending order within each segment.
nn::Matrix segment_sum(const nn::Matrix& rows, std::span<const std::size_t> offsets);

/// Feature-net parameter gradients given dL/dx_set for each observation
/// (batch_size x d3). Every vehicle of observation b receives row b of
/// `grad_xset`; per-vehicle gradients are accumulated in canonical order.
nn::MlpGrads esc_backward(const EscCache& cache, const nn::MlpParams& feature_params,
                          const nn::Matrix& grad_xset);

struct EscResult {
  StateVector state;
  EscCache cache;
};

/// s = [sum_x h(x; phi) ; x_else]. Bitwise identical for every ordering of
/// the vehicle list. Throws DomainError on an empty vehicle list (pad first).
EscResult esc_represent(const ObservationSet& obs, const nn::MlpParams& feature_params);

/// Single-observation backward; `grad_xset` has length d3.
nn::MlpGrads esc_backward(const EscCache& cache, const nn::MlpParams& feature_params,
                          std::span<const double> grad_xset);

using Encoder = std::function<std::vector<double>(std::span<const double>)>;

/// ESC pooling with an arbitrary per-vehicle encoder (e.g. the analytic
/// power-feature encoder). Same canonical summation order as the net version.
StateVector esc_represent(const ObservationSet& obs, const Encoder& encoder);

/// [x_perm(0); ...; x_perm(M-1); x_else]. `perm` must be a bijection on 0..M-1.
StateVector ap_represent(const ObservationSet& obs, std::span<const std::size_t> perm);

/// Uniform random permutation of 0..m-1 (Fisher-Yates).
std::vector<std::size_t> sample_permutation(std::size_t m, Rng& rng);

/// Vehicles sorted lexicographically (first coordinate, then second, ...),
/// concatenated, then x_else.
StateVector fp_represent(const ObservationSet& obs);

/// Appends copies of `pad` until the observation holds `target` vehicles.
ObservationSet pad_virtual(const ObservationSet& obs, std::size_t target,
                           std::span<const double> pad);

/// [z_1^1..z_1^N, ..., z_d1^1..z_d1^N, 1] with z_j the min-max scaled
/// coordinate. Summed over a set this reproduces the G mapping.
std::vector<double> power_feature_encode(std::span<const double> x, std::size_t max_set_size,
                                         double c_min, double c_max);

}  // namespace esc

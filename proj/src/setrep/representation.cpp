#include "esc/setrep/representation.hpp"

#include <algorithm>
#include <string>

#include "esc/error.hpp"
#include "esc/injectivity/injectivity.hpp"

namespace esc {

SetBatch make_set_batch(std::span<const ObservationSet* const> samples) {
  SetBatch batch;
  if (samples.empty()) throw ShapeError("make_set_batch: empty batch");
  const std::size_t d1 = samples.front()->d1();
  std::size_t total = 0;
  batch.offsets.reserve(samples.size() + 1);
  batch.offsets.push_back(0);
  for (const ObservationSet* obs : samples) {
    if (obs->vehicle_count() == 0) {
      throw DomainError("make_set_batch: observation without vehicles; apply pad_virtual first");
    }
    if (obs->d1() != d1) throw ShapeError("make_set_batch: mixed vehicle widths");
    total += obs->vehicle_count();
    batch.offsets.push_back(total);
  }
  batch.vehicles = nn::Matrix(total, d1);
  std::size_t row = 0;
  for (const ObservationSet* obs : samples) {
    for (std::size_t idx : canonical_order(*obs)) {
      auto v = obs->vehicle(idx);
      std::copy(v.begin(), v.end(), batch.vehicles.row(row++).begin());
    }
  }
  return batch;
}

nn::Matrix segment_sum(const nn::Matrix& rows, std::span<const std::size_t> offsets) {
  if (offsets.size() < 2 || offsets.back() != rows.rows()) {
    throw ShapeError("segment_sum: offsets do not cover " + std::to_string(rows.rows()) + " rows");
  }
  const std::size_t segments = offsets.size() - 1;
  nn::Matrix out(segments, rows.cols());
  for (std::size_t b = 0; b < segments; ++b) {
    auto dst = out.row(b);
    for (std::size_t r = offsets[b]; r < offsets[b + 1]; ++r) {
      auto src = rows.row(r);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
  }
  return out;
}

EscBatchResult esc_forward_batch(const SetBatch& batch, const nn::MlpParams& feature_params) {
  auto fwd = nn::mlp_forward(feature_params, batch.vehicles);
  EscBatchResult result;
  result.x_set = segment_sum(fwd.output, batch.offsets);
  result.cache.feature_cache = std::move(fwd.cache);
  result.cache.offsets = batch.offsets;
  return result;
}

nn::MlpGrads esc_backward(const EscCache& cache, const nn::MlpParams& feature_params,
                          const nn::Matrix& grad_xset) {
  const std::size_t segments = cache.offsets.empty() ? 0 : cache.offsets.size() - 1;
  if (grad_xset.rows() != segments || grad_xset.cols() != feature_params.output_dim()) {
    throw ShapeError("esc_backward: grad_xset " + grad_xset.shape_string() + " for " +
                     std::to_string(segments) + " observations of width " +
                     std::to_string(feature_params.output_dim()));
  }
  nn::Matrix per_row(cache.offsets.back(), grad_xset.cols());
  for (std::size_t b = 0; b < segments; ++b) {
    auto g = grad_xset.row(b);
    for (std::size_t r = cache.offsets[b]; r < cache.offsets[b + 1]; ++r) {
      std::copy(g.begin(), g.end(), per_row.row(r).begin());
    }
  }
  return nn::mlp_backward(feature_params, cache.feature_cache, per_row).grads;
}

EscResult esc_represent(const ObservationSet& obs, const nn::MlpParams& feature_params) {
  if (obs.vehicle_count() == 0) {
    throw DomainError("esc_represent: empty vehicle list; apply pad_virtual first");
  }
  if (feature_params.input_dim() != obs.d1()) {
    throw ShapeError("esc_represent: feature net expects " +
                     std::to_string(feature_params.input_dim()) + " inputs, vehicles have " +
                     std::to_string(obs.d1()));
  }
  const ObservationSet* one[] = {&obs};
  auto fwd = esc_forward_batch(make_set_batch(one), feature_params);
  EscResult result;
  auto pooled = fwd.x_set.row(0);
  result.state.layout = StateLayout::Esc;
  result.state.values.assign(pooled.begin(), pooled.end());
  result.state.values.insert(result.state.values.end(), obs.x_else().begin(), obs.x_else().end());
  result.cache = std::move(fwd.cache);
  return result;
}

nn::MlpGrads esc_backward(const EscCache& cache, const nn::MlpParams& feature_params,
                          std::span<const double> grad_xset) {
  nn::Matrix g(1, grad_xset.size(), std::vector<double>(grad_xset.begin(), grad_xset.end()));
  return esc_backward(cache, feature_params, g);
}

StateVector esc_represent(const ObservationSet& obs, const Encoder& encoder) {
  if (obs.vehicle_count() == 0) {
    throw DomainError("esc_represent: empty vehicle list; apply pad_virtual first");
  }
  StateVector s;
  s.layout = StateLayout::Esc;
  for (std::size_t idx : canonical_order(obs)) {
    const auto enc = encoder(obs.vehicle(idx));
    if (s.values.empty()) {
      s.values = enc;
    } else {
      if (enc.size() != s.values.size()) throw ShapeError("esc_represent: encoder width changed");
      for (std::size_t c = 0; c < enc.size(); ++c) s.values[c] += enc[c];
    }
  }
  s.values.insert(s.values.end(), obs.x_else().begin(), obs.x_else().end());
  return s;
}

StateVector ap_represent(const ObservationSet& obs, std::span<const std::size_t> perm) {
  const std::size_t m = obs.vehicle_count();
  if (perm.size() != m) {
    throw ConfigError("ap_represent: permutation of size " + std::to_string(perm.size()) +
                      " for " + std::to_string(m) + " vehicles");
  }
  std::vector<bool> seen(m, false);
  for (std::size_t p : perm) {
    if (p >= m || seen[p]) throw ConfigError("ap_represent: not a permutation");
    seen[p] = true;
  }
  StateVector s;
  s.layout = StateLayout::Flat;
  s.values.reserve(m * obs.d1() + obs.d2());
  for (std::size_t p : perm) {
    auto v = obs.vehicle(p);
    s.values.insert(s.values.end(), v.begin(), v.end());
  }
  s.values.insert(s.values.end(), obs.x_else().begin(), obs.x_else().end());
  return s;
}

std::vector<std::size_t> sample_permutation(std::size_t m, Rng& rng) {
  std::vector<std::size_t> perm(m);
  for (std::size_t i = 0; i < m; ++i) perm[i] = i;
  for (std::size_t i = m; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

StateVector fp_represent(const ObservationSet& obs) {
  if (obs.vehicle_count() == 0) throw DomainError("fp_represent: empty vehicle list");
  StateVector s = ap_represent(obs, canonical_order(obs));
  return s;
}

ObservationSet pad_virtual(const ObservationSet& obs, std::size_t target,
                           std::span<const double> pad) {
  const std::size_t m = obs.vehicle_count();
  if (m > target) {
    throw DomainError("pad_virtual: " + std::to_string(m) + " vehicles exceed target " +
                      std::to_string(target) + " (truncation is not supported)");
  }
  if (m > 0 && pad.size() != obs.d1()) {
    throw ShapeError("pad_virtual: pad width " + std::to_string(pad.size()) + " vs d1 " +
                     std::to_string(obs.d1()));
  }
  std::vector<double> values(obs.vehicle_values().begin(), obs.vehicle_values().end());
  for (std::size_t i = m; i < target; ++i) values.insert(values.end(), pad.begin(), pad.end());
  const std::size_t d1 = m > 0 ? obs.d1() : pad.size();
  return ObservationSet(d1, std::move(values),
                        std::vector<double>(obs.x_else().begin(), obs.x_else().end()));
}

std::vector<double> power_feature_encode(std::span<const double> x, std::size_t max_set_size,
                                         double c_min, double c_max) {
  const auto scaled = inj::minmax_scale(x, c_min, c_max);
  std::vector<double> out;
  out.reserve(scaled.size() * max_set_size + 1);
  for (double z : scaled) {
    double p = 1.0;
    for (std::size_t k = 1; k <= max_set_size; ++k) {
      p *= z;
      out.push_back(p);
    }
  }
  out.push_back(1.0);
  return out;
}

}  // namespace esc

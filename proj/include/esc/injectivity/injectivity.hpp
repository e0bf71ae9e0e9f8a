#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "esc/rng.hpp"

namespace esc::inj {

/// z = (x - c_min) / (c_max - c_min). Throws DomainError if an entry lies
/// outside [c_min, c_max] or if c_max <= c_min.
std::vector<double> minmax_scale(std::span<const double> values, double c_min, double c_max);

/// Multiset of scalars in [0, 1].
class ScalarSet {
 public:
  explicit ScalarSet(std::vector<double> values);
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<double> values_;
};

/// E_n(Z): k-th entry is sum_i z_i^k for k = 1..n. Summation runs over the
/// values in ascending order, so equal multisets map to identical bits.
std::vector<double> sum_of_power(const ScalarSet& set, std::size_t n);

using Vehicle = std::vector<double>;
using VehicleSet = std::vector<Vehicle>;

/// G mapping: per-coordinate scaled power sums E_N stacked for every
/// coordinate, then the set size as final entry. Vehicles are visited in
/// lexicographic order. Throws DomainError if the set holds more than N
/// vehicles or an entry is out of bounds.
///
/// Each block only sees the multiset of one coordinate, so for d1 >= 2 two
/// sets with the same per-coordinate marginals collide, e.g.
/// {(a,a),(b,b)} and {(a,b),(b,a)}. For d1 = 1 the map is injective.
std::vector<double> g_mapping(const VehicleSet& vehicles, std::size_t max_set_size, double c_min,
                              double c_max);

/// Search domain: vehicles of width d1 with 1..max_set_size members; every
/// entry lies on the grid c_min + k * grid_step within [c_min, c_max].
struct SearchSpace {
  std::size_t d1 = 1;
  std::size_t max_set_size = 4;
  double c_min = 0.0;
  double c_max = 1.0;
  double grid_step = 0.25;

  std::size_t grid_points() const;
  double grid_value(std::size_t k) const;
};

using SetEmbedding = std::function<std::vector<double>(const VehicleSet&)>;

struct Collision {
  VehicleSet first;
  VehicleSet second;
  double distance = 0.0;
};

enum class PairKind : std::uint8_t { Independent, GridStep, Merge, SizeChange };

struct CollisionReport {
  std::string embedding;
  std::uint64_t trials = 0;
  double tolerance = 0.0;
  double min_distance = 0.0;
  std::uint64_t collision_count = 0;
  std::vector<Collision> collisions;  // first `max_witnesses` witnesses

  bool collision_found() const noexcept { return collision_count > 0; }
};

/// Draws `trials` pairs of distinct multisets from `space` (cycling through
/// independent draws, one-grid-step perturbations, merged values and size
/// changes by one) and records every pair whose embeddings lie closer than
/// `tol` in Euclidean distance.
CollisionReport collision_search(const std::string& name, const SetEmbedding& embed,
                                 const SearchSpace& space, std::uint64_t trials, double tol,
                                 Rng& rng, std::size_t max_witnesses = 8);

/// Sorted copy of a vehicle multiset; two sets are equal iff their canonical
/// forms are equal.
VehicleSet canonical(VehicleSet set);

/// Embedding that keeps only the first `n` power sums of each coordinate and
/// drops the size counter; the degraded map used to exhibit collisions.
SetEmbedding truncated_power_embedding(std::size_t n, double c_min, double c_max);

/// The G mapping as a SetEmbedding.
SetEmbedding g_mapping_embedding(std::size_t max_set_size, double c_min, double c_max);

}  // namespace esc::inj

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace esc {

/// One driving observation: a multiset of surrounding-vehicle feature vectors
/// (each of width `d1`) plus a vector of non-set features.
///
/// Vehicles are stored row-major in one buffer. Storage order carries no
/// meaning; every consumer must treat the vehicles as a multiset.
class ObservationSet {
 public:
  ObservationSet() = default;
  ObservationSet(std::size_t d1, std::vector<double> vehicle_values, std::vector<double> x_else);
  ObservationSet(const std::vector<std::vector<double>>& vehicles, std::vector<double> x_else);

  std::size_t d1() const noexcept { return d1_; }
  std::size_t d2() const noexcept { return x_else_.size(); }
  std::size_t vehicle_count() const noexcept { return d1_ == 0 ? 0 : vehicles_.size() / d1_; }

  std::span<const double> vehicle(std::size_t i) const noexcept {
    return {vehicles_.data() + i * d1_, d1_};
  }
  std::span<const double> vehicle_values() const noexcept { return vehicles_; }
  std::span<const double> x_else() const noexcept { return x_else_; }

  void add_vehicle(std::span<const double> values);

  /// Copy with vehicles reordered: result.vehicle(k) == vehicle(order[k]).
  ObservationSet permuted(std::span<const std::size_t> order) const;

  friend bool operator==(const ObservationSet&, const ObservationSet&) = default;

 private:
  std::size_t d1_ = 0;
  std::vector<double> vehicles_;
  std::vector<double> x_else_;
};

/// Lexicographic "less" on two equal-width vectors.
bool lex_less(std::span<const double> a, std::span<const double> b) noexcept;

/// Vehicle indices sorted lexicographically; stable for equal vectors.
std::vector<std::size_t> canonical_order(const ObservationSet& obs);

}  // namespace esc

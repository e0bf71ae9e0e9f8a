#include "esc/setrep/observation.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "esc/error.hpp"

namespace esc {

ObservationSet::ObservationSet(std::size_t d1, std::vector<double> vehicle_values,
                               std::vector<double> x_else)
    : d1_(d1), vehicles_(std::move(vehicle_values)), x_else_(std::move(x_else)) {
  if (d1_ == 0 && !vehicles_.empty()) throw ShapeError("ObservationSet: d1 is zero");
  if (d1_ != 0 && vehicles_.size() % d1_ != 0) {
    throw ShapeError("ObservationSet: " + std::to_string(vehicles_.size()) +
                     " vehicle values not a multiple of d1=" + std::to_string(d1_));
  }
}

ObservationSet::ObservationSet(const std::vector<std::vector<double>>& vehicles,
                               std::vector<double> x_else)
    : x_else_(std::move(x_else)) {
  if (!vehicles.empty()) d1_ = vehicles.front().size();
  for (const auto& v : vehicles) add_vehicle(v);
}

void ObservationSet::add_vehicle(std::span<const double> values) {
  if (d1_ == 0) d1_ = values.size();
  if (values.size() != d1_ || d1_ == 0) {
    throw ShapeError("ObservationSet: vehicle of width " + std::to_string(values.size()) +
                     ", expected " + std::to_string(d1_));
  }
  vehicles_.insert(vehicles_.end(), values.begin(), values.end());
}

ObservationSet ObservationSet::permuted(std::span<const std::size_t> order) const {
  if (order.size() != vehicle_count()) {
    throw ShapeError("ObservationSet::permuted: order of size " + std::to_string(order.size()) +
                     " for " + std::to_string(vehicle_count()) + " vehicles");
  }
  std::vector<double> values;
  values.reserve(vehicles_.size());
  for (std::size_t idx : order) {
    auto v = vehicle(idx);
    values.insert(values.end(), v.begin(), v.end());
  }
  return ObservationSet(d1_, std::move(values), x_else_);
}

bool lex_less(std::span<const double> a, std::span<const double> b) noexcept {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::vector<std::size_t> canonical_order(const ObservationSet& obs) {
  std::vector<std::size_t> order(obs.vehicle_count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lex_less(obs.vehicle(a), obs.vehicle(b));
  });
  return order;
}

}  // namespace esc

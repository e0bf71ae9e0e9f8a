#include "esc/injectivity/injectivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "esc/error.hpp"

namespace esc::inj {

std::vector<double> minmax_scale(std::span<const double> values, double c_min, double c_max) {
  if (!(c_max > c_min)) throw DomainError("minmax_scale: c_max must exceed c_min");
  std::vector<double> out;
  out.reserve(values.size());
  const double range = c_max - c_min;
  for (double x : values) {
    if (!(x >= c_min && x <= c_max)) {
      throw DomainError("minmax_scale: value " + std::to_string(x) + " outside [" +
                        std::to_string(c_min) + ", " + std::to_string(c_max) + "]");
    }
    out.push_back((x - c_min) / range);
  }
  return out;
}

ScalarSet::ScalarSet(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("ScalarSet: value outside [0, 1]");
  }
}

std::vector<double> sum_of_power(const ScalarSet& set, std::size_t n) {
  if (n == 0) throw DomainError("sum_of_power: n must be positive");
  std::vector<double> sorted(set.values().begin(), set.values().end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out(n, 0.0);
  for (double z : sorted) {
    double p = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      p *= z;
      out[k] += p;
    }
  }
  return out;
}

VehicleSet canonical(VehicleSet set) {
  std::stable_sort(set.begin(), set.end());
  return set;
}

std::vector<double> g_mapping(const VehicleSet& vehicles, std::size_t max_set_size, double c_min,
                              double c_max) {
  if (vehicles.size() > max_set_size) {
    throw DomainError("g_mapping: " + std::to_string(vehicles.size()) +
                      " vehicles exceed N=" + std::to_string(max_set_size));
  }
  if (vehicles.empty()) throw DomainError("g_mapping: empty set");
  const std::size_t d1 = vehicles.front().size();
  std::vector<double> out(d1 * max_set_size + 1, 0.0);
  for (const Vehicle& v : canonical(vehicles)) {
    if (v.size() != d1) throw ShapeError("g_mapping: mixed vehicle widths");
    const auto z = minmax_scale(v, c_min, c_max);
    for (std::size_t j = 0; j < d1; ++j) {
      double p = 1.0;
      for (std::size_t k = 0; k < max_set_size; ++k) {
        p *= z[j];
        out[j * max_set_size + k] += p;
      }
    }
    out.back() += 1.0;
  }
  return out;
}

std::size_t SearchSpace::grid_points() const {
  if (!(grid_step > 0.0) || !(c_max > c_min)) throw ConfigError("SearchSpace: bad grid");
  return static_cast<std::size_t>(std::floor((c_max - c_min) / grid_step + 1e-9)) + 1;
}

double SearchSpace::grid_value(std::size_t k) const {
  return c_min + static_cast<double>(k) * grid_step;
}

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Vehicles are held as grid indices while searching so that equality of
// multisets is exact.
using GridVehicle = std::vector<std::size_t>;
using GridSet = std::vector<GridVehicle>;

GridSet random_set(const SearchSpace& s, std::size_t size, Rng& rng) {
  const std::size_t points = s.grid_points();
  GridSet set(size, GridVehicle(s.d1));
  for (auto& v : set)
    for (auto& k : v) k = static_cast<std::size_t>(rng.below(points));
  return set;
}

GridSet perturb(const SearchSpace& s, const GridSet& base, PairKind kind, Rng& rng) {
  const std::size_t points = s.grid_points();
  GridSet out = base;
  switch (kind) {
    case PairKind::Independent: {
      const auto size = 1 + static_cast<std::size_t>(rng.below(s.max_set_size));
      return random_set(s, size, rng);
    }
    case PairKind::GridStep: {
      auto& v = out[rng.below(out.size())];
      auto& k = v[rng.below(s.d1)];
      if (k == 0) {
        k = 1;
      } else if (k + 1 == points) {
        k -= 1;
      } else {
        k = rng.below(2) == 0 ? k - 1 : k + 1;
      }
      return out;
    }
    case PairKind::Merge: {
      // Copy one coordinate of one vehicle onto another vehicle (or onto a
      // neighbouring grid value for singletons): two values become one.
      const std::size_t j = rng.below(s.d1);
      const std::size_t a = rng.below(out.size());
      if (out.size() == 1) {
        out[a][j] = rng.below(points);
      } else {
        std::size_t b = rng.below(out.size() - 1);
        if (b >= a) ++b;
        out[b][j] = out[a][j];
      }
      return out;
    }
    case PairKind::SizeChange: {
      const bool can_grow = out.size() < s.max_set_size;
      const bool can_shrink = out.size() > 1;
      if (can_grow && (!can_shrink || rng.below(2) == 0)) {
        // Frequently duplicate an existing vehicle: the hardest size change.
        if (rng.below(2) == 0) {
          out.push_back(out[rng.below(out.size())]);
        } else {
          out.push_back(random_set(s, 1, rng).front());
        }
      } else if (can_shrink) {
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(rng.below(out.size())));
      }
      return out;
    }
  }
  return out;
}

VehicleSet to_values(const SearchSpace& s, const GridSet& set) {
  VehicleSet out;
  for (const auto& v : set) {
    Vehicle x;
    for (std::size_t k : v) x.push_back(s.grid_value(k));
    out.push_back(std::move(x));
  }
  return out;
}

GridSet sorted(GridSet set) {
  std::sort(set.begin(), set.end());
  return set;
}

}  // namespace

CollisionReport collision_search(const std::string& name, const SetEmbedding& embed,
                                 const SearchSpace& space, std::uint64_t trials, double tol,
                                 Rng& rng, std::size_t max_witnesses) {
  if (!(tol > 0.0)) throw ConfigError("collision_search: tol must be positive");
  if (space.d1 == 0 || space.max_set_size == 0) throw ConfigError("collision_search: empty space");
  CollisionReport report;
  report.embedding = name;
  report.tolerance = tol;
  report.min_distance = std::numeric_limits<double>::infinity();

  constexpr PairKind kinds[] = {PairKind::Independent, PairKind::GridStep, PairKind::Merge,
                                PairKind::SizeChange};
  for (std::uint64_t t = 0; t < trials; ++t) {
    const PairKind kind = kinds[t % 4];
    const auto size = 1 + static_cast<std::size_t>(rng.below(space.max_set_size));
    const GridSet first = random_set(space, size, rng);
    GridSet second = perturb(space, first, kind, rng);
    // Redraw until the multisets genuinely differ. Merging cannot change a
    // set whose vehicles already agree everywhere; fall back to a grid step.
    for (int attempt = 0; sorted(second) == sorted(first); ++attempt) {
      second = perturb(space, first, attempt < 16 ? kind : PairKind::GridStep, rng);
    }

    const VehicleSet a = to_values(space, first);
    const VehicleSet b = to_values(space, second);
    const double d = distance(embed(a), embed(b));
    ++report.trials;
    report.min_distance = std::min(report.min_distance, d);
    if (d < tol) {
      ++report.collision_count;
      if (report.collisions.size() < max_witnesses) {
        report.collisions.push_back({canonical(a), canonical(b), d});
      }
    }
  }
  return report;
}

SetEmbedding truncated_power_embedding(std::size_t n, double c_min, double c_max) {
  return [=](const VehicleSet& set) {
    if (set.empty()) throw DomainError("truncated_power_embedding: empty set");
    const std::size_t d1 = set.front().size();
    std::vector<double> out;
    for (std::size_t j = 0; j < d1; ++j) {
      std::vector<double> column;
      for (const auto& v : set) column.push_back(v[j]);
      const auto e = sum_of_power(ScalarSet(minmax_scale(column, c_min, c_max)), n);
      out.insert(out.end(), e.begin(), e.end());
    }
    return out;
  };
}

SetEmbedding g_mapping_embedding(std::size_t max_set_size, double c_min, double c_max) {
  return [=](const VehicleSet& set) { return g_mapping(set, max_set_size, c_min, c_max); };
}

}  // namespace esc::inj

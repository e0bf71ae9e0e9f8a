#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "esc/rng.hpp"
#include "esc/setrep/observation.hpp"

namespace esc::bench {

/// Identifier of one of the six target policy functions (1..6).
class BenchmarkId {
 public:
  explicit BenchmarkId(int id);
  int value() const noexcept { return id_; }
  friend bool operator==(BenchmarkId, BenchmarkId) = default;

 private:
  int id_;
};

/// (sum |v_i|^p)^(1/p). Throws DomainError for an empty vector or p < 1.
double pnorm(std::span<const double> v, double p);

/// Evaluates target policy function `id` on `obs`.
///
/// Per-vehicle aggregates (mean, min, max, p-norms over the vehicle list) are
/// computed on the sorted list of per-vehicle scalars, so the result is
/// bitwise identical under any reordering of the vehicles.
double eval_benchmark(BenchmarkId id, const ObservationSet& obs);

using SetFunction = std::function<double(const ObservationSet&)>;

struct InvarianceReport {
  bool invariant = true;
  double max_deviation = 0.0;
  std::optional<std::vector<std::size_t>> witness;
};

/// Evaluates `f` under `trials` random vehicle permutations and compares each
/// result with the unpermuted value. `invariant` holds iff every deviation is
/// exactly zero; otherwise `witness` is the permutation with the largest one.
InvarianceReport check_permutation_invariance(const SetFunction& f, const ObservationSet& obs,
                                              std::size_t trials, Rng& rng);

}  // namespace esc::bench

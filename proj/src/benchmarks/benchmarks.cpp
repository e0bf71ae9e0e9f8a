#include "esc/benchmarks/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "esc/error.hpp"
#include "esc/setrep/representation.hpp"

namespace esc::bench {

BenchmarkId::BenchmarkId(int id) : id_(id) {
  if (id < 1 || id > 6) throw ConfigError("unknown benchmark id " + std::to_string(id));
}

double pnorm(std::span<const double> v, double p) {
  if (v.empty()) throw DomainError("pnorm: empty vector");
  if (!(p >= 1.0)) throw DomainError("pnorm: p must be >= 1");
  double s = 0.0;
  if (p == 1.0) {
    for (double x : v) s += std::abs(x);
    return s;
  }
  if (p == 2.0) {
    for (double x : v) s += x * x;
    return std::sqrt(s);
  }
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(s, 1.0 / p);
}

namespace {

double vmin(std::span<const double> v) { return *std::min_element(v.begin(), v.end()); }
double vmax(std::span<const double> v) { return *std::max_element(v.begin(), v.end()); }
double vmean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Aggregates over the vehicle list. Sorting first makes the summation order
// independent of how the vehicles happen to be stored.
class VehicleList {
 public:
  explicit VehicleList(std::vector<double> values) : values_(std::move(values)) {
    std::sort(values_.begin(), values_.end());
  }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }
  double mean() const { return vmean(values_); }
  double norm(double p) const { return pnorm(values_, p); }

 private:
  std::vector<double> values_;
};

template <typename PerVehicle>
VehicleList collect(const ObservationSet& obs, PerVehicle f) {
  std::vector<double> out;
  out.reserve(obs.vehicle_count());
  for (std::size_t i = 0; i < obs.vehicle_count(); ++i) out.push_back(f(obs.vehicle(i)));
  return VehicleList(std::move(out));
}

}  // namespace

double eval_benchmark(BenchmarkId id, const ObservationSet& obs) {
  if (obs.vehicle_count() == 0) throw DomainError("eval_benchmark: empty vehicle list");
  if (obs.d2() == 0) throw DomainError("eval_benchmark: empty x_else");
  const auto xe = obs.x_else();
  using V = std::span<const double>;

  switch (id.value()) {
    case 1: {
      const auto n3 = collect(obs, [](V x) { return pnorm(x, 3.0); });
      const auto n1 = collect(obs, [](V x) { return pnorm(x, 1.0); });
      const auto n2 = collect(obs, [](V x) { return pnorm(x, 2.0); });
      return vmean(xe) - 0.2 * n3.min() + 0.4 * n1.mean() * n2.max();
    }
    case 2: {
      const auto mx = collect(obs, [](V x) { return vmax(x); });
      const auto n4 = collect(obs, [](V x) { return pnorm(x, 4.0); });
      return 0.5 * vmin(xe) * mx.max() * n4.min();
    }
    case 3: {
      const auto n1 = collect(obs, [](V x) { return pnorm(x, 1.0); });
      const auto mx = collect(obs, [](V x) { return vmax(x); });
      return 0.2 * pnorm(xe, 3.0) + 2.0 * n1.mean() * mx.mean();
    }
    case 4: {
      const auto ratio = collect(obs, [](V x) { return vmin(x) / (pnorm(x, 2.0) + 0.1); });
      return 5.0 * pnorm(xe, 2.0) * ratio.norm(4.0);
    }
    case 5: {
      const auto ratio =
          collect(obs, [](V x) { return vmean(x) * vmax(x) / (pnorm(x, 4.0) + 0.1); });
      return 10.0 * pnorm(xe, 4.0) * ratio.mean();
    }
    case 6: {
      const auto ratio =
          collect(obs, [](V x) { return vmean(x) * pnorm(x, 3.0) / (pnorm(x, 2.0) + 0.1); });
      return 8.0 * pnorm(xe, 2.0) * ratio.max();
    }
    default:
      break;
  }
  throw ConfigError("unknown benchmark id " + std::to_string(id.value()));
}

InvarianceReport check_permutation_invariance(const SetFunction& f, const ObservationSet& obs,
                                              std::size_t trials, Rng& rng) {
  if (trials == 0) throw ConfigError("check_permutation_invariance: trials must be >= 1");
  InvarianceReport report;
  const double reference = f(obs);
  for (std::size_t t = 0; t < trials; ++t) {
    auto perm = sample_permutation(obs.vehicle_count(), rng);
    const double value = f(obs.permuted(perm));
    const double dev = std::abs(value - reference);
    // NaN results count as a deviation too.
    if (dev > report.max_deviation || (value != reference && !report.witness)) {
      report.max_deviation = std::max(report.max_deviation, dev);
      report.witness = std::move(perm);
    }
    if (value != reference) report.invariant = false;
  }
  if (report.invariant) report.witness.reset();
  return report;
}

}  // namespace esc::bench

#pragma once

// Shared helpers for the unit tests and the acceptance runner.

#include <cmath>
#include <cstring>
#include <vector>

#include "esc/data/config.hpp"
#include "esc/data/dataset.hpp"
#include "esc/rng.hpp"
#include "esc/setrep/observation.hpp"

namespace esc::testing {

inline ObservationSet random_obs(Rng& rng, std::size_t d1, std::size_t d2, std::size_t m,
                                 double lo = -5.0, double hi = 5.0) {
  std::vector<double> veh(m * d1), xe(d2);
  for (double& v : veh) v = rng.uniform(lo, hi);
  for (double& v : xe) v = rng.uniform(lo, hi);
  return ObservationSet(d1, std::move(veh), std::move(xe));
}

inline bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1e-300, std::abs(a), std::abs(b)});
}

// Tiny desk-shaped config for fast training tests.
inline data::ExperimentConfig tiny_config() {
  auto c = data::desk_preset();
  c.train_size = 512;
  c.test_size = 256;
  c.batch_size = 64;
  c.iterations = 60;
  c.eval_interval = 20;
  c.architecture.feature_hidden = {16};
  c.architecture.policy_hidden = {16};
  c.architecture.baseline_hidden = {16, 19, 16};
  c.architecture.baseline_linear_layer = 1;
  return c;
}

}  // namespace esc::testing

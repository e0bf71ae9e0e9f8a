#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "esc/error.hpp"
#include "esc/injectivity/injectivity.hpp"
#include "esc/nn/finite_diff.hpp"
#include "esc/setrep/representation.hpp"
#include "support.hpp"

using namespace esc;
using esc::testing::random_obs;
using esc::testing::same_bits;

namespace {

std::vector<std::size_t> shuffled(std::size_t m, Rng& rng) { return sample_permutation(m, rng); }

}  // namespace

TEST_CASE("esc_represent: single vehicle is [h(x); x_else]") {
  const auto phi = nn::init_params({3, 8, 5}, 1);
  const ObservationSet obs({{0.5, -1.0, 2.0}}, {7.0, 8.0});
  const auto s = esc_represent(obs, phi).state;
  const auto h = nn::mlp_predict(phi, nn::Matrix(1, 3, {0.5, -1.0, 2.0}));
  REQUIRE(s.values.size() == 7);
  CHECK(s.layout == StateLayout::Esc);
  for (std::size_t k = 0; k < 5; ++k) CHECK(s.values[k] == h(0, k));
  CHECK(s.values[5] == 7.0);
  CHECK(s.values[6] == 8.0);
}

TEST_CASE("esc_represent and fp_represent are bitwise permutation invariant") {
  Rng rng(42);
  const auto phi = nn::init_params({5, 16, 16, 101}, 3);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 1 + rng.below(20);
    const auto obs = random_obs(rng, 5, 10, m);
    const auto esc = esc_represent(obs, phi).state.values;
    const auto fp = fp_represent(obs).values;
    CHECK(esc.size() == 111);
    CHECK(fp.size() == m * 5 + 10);
    for (int p = 0; p < 20; ++p) {
      const auto perm = shuffled(m, rng);
      const auto other = obs.permuted(perm);
      CHECK(same_bits(esc_represent(other, phi).state.values, esc));
      CHECK(same_bits(fp_represent(other).values, fp));
    }
  }
}

TEST_CASE("esc_represent: empty vehicle list asks for padding") {
  const auto phi = nn::init_params({2, 4, 3}, 1);
  const ObservationSet empty(2, {}, {1.0});
  CHECK_THROWS_AS(esc_represent(empty, phi), DomainError);
  const auto padded = pad_virtual(empty, 1, std::vector<double>{5.0, 5.0});
  CHECK(esc_represent(padded, phi).state.values.size() == 4);
}

TEST_CASE("esc with the power encoder equals the G mapping exactly") {
  Rng rng(8);
  const std::size_t n = 6;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng.below(n);
    const auto obs = random_obs(rng, 3, 0, m);
    const Encoder enc = [&](std::span<const double> x) { return power_feature_encode(x, n, -5.0, 5.0); };
    const auto pooled = esc_represent(obs, enc).values;
    inj::VehicleSet set;
    for (std::size_t i = 0; i < m; ++i) set.emplace_back(obs.vehicle(i).begin(), obs.vehicle(i).end());
    CHECK(same_bits(pooled, inj::g_mapping(set, n, -5.0, 5.0)));
  }
}

TEST_CASE("esc_backward: single vehicle equals plain backprop") {
  const auto phi = nn::init_params({3, 6, 4}, 2);
  const ObservationSet obs({{0.1, 0.2, -0.3}}, {});
  const auto r = esc_represent(obs, phi);
  const std::vector<double> g{1.0, -2.0, 0.5, 0.25};
  const auto grads = esc_backward(r.cache, phi, g);
  const auto fwd = nn::mlp_forward(phi, nn::Matrix(1, 3, {0.1, 0.2, -0.3}));
  const auto plain = nn::mlp_backward(phi, fwd.cache, nn::Matrix(1, 4, g));
  CHECK(grads == plain.grads);
}

TEST_CASE("esc_backward: a duplicated vehicle doubles the gradient") {
  const auto phi = nn::init_params({2, 5, 3}, 2);
  const std::vector<double> g{0.3, -1.0, 2.0};
  const auto one = esc_backward(esc_represent(ObservationSet({{0.4, -0.6}}, {}), phi).cache, phi, g);
  const auto two =
      esc_backward(esc_represent(ObservationSet({{0.4, -0.6}, {0.4, -0.6}}, {}), phi).cache, phi, g);
  const auto a = nn::flatten(one);
  const auto b = nn::flatten(two);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(b[k] == 2.0 * a[k]);
}

TEST_CASE("esc_backward: agrees with finite differences of ||x_set||^2") {
  Rng rng(12);
  auto phi = nn::init_params({3, 7, 7, 4}, 5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto obs = random_obs(rng, 3, 2, 1 + rng.below(5), -1.0, 1.0);
    const std::size_t d3 = 4;
    auto loss = [&](const nn::MlpParams& p) {
      const auto s = esc_represent(obs, p).state.values;
      double v = 0.0;
      for (std::size_t k = 0; k < d3; ++k) v += s[k] * s[k];
      return v;
    };
    const auto r = esc_represent(obs, phi);
    std::vector<double> g(d3);
    for (std::size_t k = 0; k < d3; ++k) g[k] = 2.0 * r.state.values[k];
    const auto analytic = esc_backward(r.cache, phi, g);
    const auto numeric = nn::finite_diff_grad(loss, phi, 1e-5);
    CHECK(nn::max_relative_error(nn::flatten(analytic), nn::flatten(numeric)) <= 1e-4);
  }
}

TEST_CASE("esc_backward: wrong gradient width is rejected") {
  const auto phi = nn::init_params({2, 3}, 1);
  const auto r = esc_represent(ObservationSet({{0.0, 0.0}}, {}), phi);
  CHECK_THROWS_AS(esc_backward(r.cache, phi, std::vector<double>{1.0, 2.0}), ShapeError);
}

TEST_CASE("batched esc matches per-observation esc") {
  Rng rng(19);
  const auto phi = nn::init_params({3, 8, 6}, 4);
  std::vector<ObservationSet> obs;
  for (int i = 0; i < 6; ++i) obs.push_back(random_obs(rng, 3, 1, 1 + rng.below(6)));
  std::vector<const ObservationSet*> ptrs;
  for (const auto& o : obs) ptrs.push_back(&o);
  const auto batch = make_set_batch(ptrs);
  const auto pooled = esc_forward_batch(batch, phi).x_set;
  for (std::size_t b = 0; b < obs.size(); ++b) {
    const auto single = esc_represent(obs[b], phi).state.values;
    for (std::size_t k = 0; k < 6; ++k) CHECK(pooled(b, k) == single[k]);
  }
}

TEST_CASE("ap_represent: concatenates in the given order") {
  const ObservationSet obs({{1.0}, {2.0}}, {9.0});
  const std::vector<std::size_t> id{0, 1}, swap{1, 0};
  CHECK(ap_represent(obs, id).values == std::vector<double>{1, 2, 9});
  CHECK(ap_represent(obs, swap).values == std::vector<double>{2, 1, 9});
  CHECK_THROWS_AS(ap_represent(obs, std::vector<std::size_t>{0}), ConfigError);
  CHECK_THROWS_AS(ap_represent(obs, std::vector<std::size_t>{0, 0}), ConfigError);
}

TEST_CASE("single vehicle: AP, FP and flat concatenation coincide") {
  const ObservationSet obs({{3.0, -1.0}}, {4.0});
  const std::vector<std::size_t> id{0};
  const std::vector<double> flat{3.0, -1.0, 4.0};
  CHECK(ap_represent(obs, id).values == flat);
  CHECK(fp_represent(obs).values == flat);
}

TEST_CASE("ap_represent is permutation sensitive") {
  const ObservationSet obs({{1.0, 2.0}, {3.0, 4.0}}, {});
  const std::vector<std::size_t> id{0, 1}, swap{1, 0};
  CHECK(ap_represent(obs, id) != ap_represent(obs, swap));
}

TEST_CASE("sample_permutation: uniform frequencies") {
  Rng rng(5);
  SUBCASE("M = 1") {
    for (int i = 0; i < 100; ++i) CHECK(sample_permutation(1, rng) == std::vector<std::size_t>{0});
  }
  SUBCASE("M = 2") {
    int identity = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) identity += sample_permutation(2, rng)[0] == 0;
    CHECK(std::abs(identity / double(draws) - 0.5) <= 0.01);
  }
  SUBCASE("M = 3") {
    std::map<std::vector<std::size_t>, int> counts;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ++counts[sample_permutation(3, rng)];
    CHECK(counts.size() == 6);
    for (const auto& [perm, c] : counts) CHECK(std::abs(c / double(draws) - 1.0 / 6.0) <= 0.15 / 6.0);
  }
}

TEST_CASE("fp_represent: lexicographic sorting") {
  const ObservationSet obs({{2, 0}, {1, 5}, {1, 2}}, {});
  CHECK(fp_represent(obs).values == std::vector<double>{1, 2, 1, 5, 2, 0});

  const ObservationSet below({{0.999, 2}, {1, 5}}, {});
  const ObservationSet above({{1.001, 2}, {1, 5}}, {});
  CHECK(fp_represent(below).values == std::vector<double>{0.999, 2, 1, 5});
  CHECK(fp_represent(above).values == std::vector<double>{1, 5, 1.001, 2});
}

TEST_CASE("sort flip: FP jumps by 3*sqrt(2), ESC does not") {
  const auto phi = nn::init_params({2, 16, 5}, 9);
  auto scene = [](double j) { return ObservationSet({{j, 2}, {1, 5}}, {}); };
  double prev = INFINITY;
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    const auto a = fp_represent(scene(1 - eps)).values;
    const auto b = fp_represent(scene(1 + eps)).values;
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d += (a[k] - b[k]) * (a[k] - b[k]);
    CHECK(std::abs(std::sqrt(d) - 3 * std::sqrt(2.0)) <= 1e-9 + 2 * eps);

    const auto ea = esc_represent(scene(1 - eps), phi).state.values;
    const auto eb = esc_represent(scene(1 + eps), phi).state.values;
    double e = 0.0;
    for (std::size_t k = 0; k < ea.size(); ++k) e += (ea[k] - eb[k]) * (ea[k] - eb[k]);
    CHECK(std::sqrt(e) < prev);
    prev = std::sqrt(e);
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("pad_virtual") {
  const std::vector<double> pad{5.0, 5.0};
  const ObservationSet two({{1, 2}, {3, 4}}, {0.5});
  CHECK(pad_virtual(two, 2, pad) == two);
  const auto four = pad_virtual(two, 4, pad);
  REQUIRE(four.vehicle_count() == 4);
  CHECK(std::vector<double>(four.vehicle(2).begin(), four.vehicle(2).end()) == pad);
  CHECK(std::vector<double>(four.vehicle(3).begin(), four.vehicle(3).end()) == pad);
  const auto one = pad_virtual(ObservationSet(2, {}, {0.5}), 1, pad);
  REQUIRE(one.vehicle_count() == 1);
  CHECK(std::vector<double>(one.vehicle(0).begin(), one.vehicle(0).end()) == pad);
  CHECK_THROWS_AS(pad_virtual(four, 3, pad), DomainError);
}

TEST_CASE("power_feature_encode") {
  const std::vector<double> lo{-5, -5}, hi{5, 5}, mid{0};
  const auto a = power_feature_encode(lo, 3, -5, 5);
  CHECK(a == std::vector<double>{0, 0, 0, 0, 0, 0, 1});
  const auto b = power_feature_encode(hi, 3, -5, 5);
  CHECK(b == std::vector<double>{1, 1, 1, 1, 1, 1, 1});
  CHECK(power_feature_encode(mid, 2, -5, 5) == std::vector<double>{0.5, 0.25, 1});
  const std::vector<double> out{5.5};
  CHECK_THROWS_AS(power_feature_encode(out, 2, -5, 5), DomainError);
}

TEST_CASE("state dimension is fixed for ESC and grows for flat layouts") {
  Rng rng(1);
  const auto phi = nn::init_params({3, 4, 19}, 1);
  for (std::size_t m = 1; m <= 6; ++m) {
    const auto obs = random_obs(rng, 3, 4, m);
    CHECK(esc_represent(obs, phi).state.values.size() == 23);
    CHECK(fp_represent(obs).values.size() == 3 * m + 4);
  }
}

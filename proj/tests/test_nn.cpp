#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "esc/error.hpp"
#include "esc/nn/adam.hpp"
#include "esc/nn/checkpoint.hpp"
#include "esc/nn/finite_diff.hpp"
#include "esc/nn/matrix.hpp"
#include "esc/nn/mlp.hpp"
#include "esc/rng.hpp"
#include "support.hpp"

using namespace esc;
using namespace esc::nn;

namespace {

// erf by its Maclaurin series in long double; independent of the C library.
long double erf_series(long double x) {
  long double term = x, sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    const long double add = term / (2 * n + 1);
    sum += add;
    if (std::fabs(add) < 1e-30L) break;
  }
  return sum * 2.0L / std::sqrt(std::numbers::pi_v<long double>);
}

long double gelu_series(long double x) {
  return 0.5L * x * (1.0L + erf_series(x / std::sqrt(2.0L)));
}

// Scalar-loop reference forward pass.
std::vector<double> reference_forward(const MlpParams& p, std::vector<double> x) {
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    std::vector<double> y(p.layer_dims[l + 1]);
    for (std::size_t o = 0; o < y.size(); ++o) {
      double s = p.biases[l][o];
      for (std::size_t i = 0; i < x.size(); ++i) s += p.weights[l](o, i) * x[i];
      if (p.activations[l] == Activation::Gelu) {
        s = 0.5 * s * (1.0 + std::erf(s / std::sqrt(2.0)));
      }
      y[o] = s;
    }
    x = std::move(y);
  }
  return x;
}

MlpParams random_net(Rng& rng, std::size_t depth, std::size_t max_width, std::uint64_t seed) {
  std::vector<std::size_t> dims;
  for (std::size_t i = 0; i <= depth; ++i) dims.push_back(1 + rng.below(max_width));
  auto p = init_params(dims, seed);
  // Nonzero biases so every code path is exercised.
  for (auto& b : p.biases) {
    for (double& v : b) v = rng.uniform(-0.5, 0.5);
  }
  return p;
}

double half_sq_loss(const MlpParams& p, const Matrix& x, const Matrix& target) {
  const auto y = mlp_predict(p, x);
  double s = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double e = y.flat()[k] - target.flat()[k];
    s += 0.5 * e * e;
  }
  return s;
}

}  // namespace

TEST_CASE("gelu: fixed points and high-precision references") {
  CHECK(gelu(0.0) == 0.0);
  CHECK(std::abs(gelu(10.0) - 10.0) < 1e-6);
  // x * Phi(x) evaluated with 40-digit arithmetic.
  CHECK(gelu(1.0) == doctest::Approx(0.841344746068542948585232545632).epsilon(1e-15));
  CHECK(gelu(2.0) == doctest::Approx(1.95449973610364158559943472567).epsilon(1e-15));
  CHECK(gelu(-1.5) == doctest::Approx(-0.10021080190328709900674106147).epsilon(1e-14));
  CHECK(gelu(-3.0) == doctest::Approx(-0.00404969409489028357995544430278).epsilon(1e-13));
}

TEST_CASE("gelu: agrees with an erf power series to 1e-12") {
  double worst = 0.0;
  for (double x = -4.0; x <= 4.0; x += 0.01) {
    worst = std::max(worst, static_cast<double>(std::fabs(gelu(x) - gelu_series(x))));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("gelu_derivative matches central differences") {
  for (double x = -5.0; x <= 5.0; x += 0.125) {
    const double h = 1e-6;
    const double fd = (gelu(x + h) - gelu(x - h)) / (2 * h);
    CHECK(gelu_derivative(x) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("matrix: construction checks") {
  CHECK_THROWS_AS(Matrix(2, 3, std::vector<double>(5)), ShapeError);
  Matrix m(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(m(1, 0) == 4);
  CHECK(m.row(1)[2] == 6);
  CHECK(m.all_finite());
  m(0, 0) = NAN;
  CHECK_FALSE(m.all_finite());
}

TEST_CASE("mlp_forward: closed-form cases") {
  SUBCASE("zero weights give the bias on every row") {
    auto p = init_params({3, 2}, 1);
    p.weights[0].fill(0.0);
    p.biases[0] = {1.5, -2.0};
    Matrix x(4, 3, 7.0);
    const auto out = mlp_forward(p, x).output;
    for (std::size_t r = 0; r < 4; ++r) {
      CHECK(out(r, 0) == 1.5);
      CHECK(out(r, 1) == -2.0);
    }
  }
  SUBCASE("W=[[2]], b=[1], x=[3] -> 7") {
    auto p = init_params({1, 1}, 1);
    p.weights[0](0, 0) = 2.0;
    p.biases[0] = {1.0};
    CHECK(mlp_forward(p, Matrix(1, 1, {3.0})).output(0, 0) == 7.0);
  }
}

TEST_CASE("mlp_forward: matches a scalar-loop re-implementation") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_net(rng, 2, 12, 100 + trial);
    Matrix x(5, p.input_dim());
    for (double& v : x.flat()) v = rng.uniform(-2, 2);
    const auto out = mlp_forward(p, x).output;
    const auto pred = mlp_predict(p, x);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto ref = reference_forward(p, {x.row(r).begin(), x.row(r).end()});
      for (std::size_t c = 0; c < ref.size(); ++c) {
        CHECK(std::abs(out(r, c) - ref[c]) <= 1e-12 * std::max(1.0, std::abs(ref[c])));
        CHECK(out(r, c) == pred(r, c));
      }
    }
  }
}

TEST_CASE("mlp_forward: shape errors name the layer") {
  const auto p = init_params({3, 4, 1}, 1);
  try {
    mlp_forward(p, Matrix(2, 5));
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("layer 0") != std::string::npos);
  }
}

TEST_CASE("mlp_forward: repeated calls are bitwise identical") {
  Rng rng(3);
  const auto p = random_net(rng, 3, 20, 5);
  Matrix x(7, p.input_dim());
  for (double& v : x.flat()) v = rng.uniform(-1, 1);
  const auto a = mlp_forward(p, x).output;
  const auto b = mlp_forward(p, x).output;
  CHECK(a == b);
}

TEST_CASE("mlp: output layer is linear") {
  Rng rng(4);
  auto p = random_net(rng, 3, 10, 9);
  Matrix x(3, p.input_dim());
  for (double& v : x.flat()) v = rng.uniform(-1, 1);
  const auto base = mlp_predict(p, x);
  const double c = -2.5;
  for (double& v : p.weights.back().flat()) v *= c;
  for (double& v : p.biases.back()) v *= c;
  const auto scaled = mlp_predict(p, x);
  for (std::size_t k = 0; k < base.size(); ++k) {
    CHECK(scaled.flat()[k] == doctest::Approx(c * base.flat()[k]).epsilon(1e-12));
  }
}

TEST_CASE("mlp: output layer must be linear") {
  CHECK_THROWS_AS(init_params({2, 3, 1}, 1, InitScheme::GlorotUniform,
                              {Activation::Gelu, Activation::Gelu}),
                  ShapeError);
}

TEST_CASE("mlp_backward: zero upstream gradient gives zero gradients") {
  Rng rng(5);
  const auto p = random_net(rng, 3, 8, 1);
  Matrix x(4, p.input_dim(), 0.3);
  const auto fwd = mlp_forward(p, x);
  const auto back = mlp_backward(p, fwd.cache, Matrix(4, p.output_dim()));
  CHECK(back.grads.squared_norm() == 0.0);
  for (double v : back.grad_input.flat()) CHECK(v == 0.0);
}

TEST_CASE("mlp_backward: single linear layer gives the outer product") {
  auto p = init_params({3, 2}, 8);
  const Matrix x(1, 3, {1.0, -2.0, 0.5});
  const Matrix g(1, 2, {3.0, -1.0});
  const auto back = mlp_backward(p, mlp_forward(p, x).cache, g);
  for (std::size_t o = 0; o < 2; ++o) {
    for (std::size_t i = 0; i < 3; ++i) CHECK(back.grads.weights[0](o, i) == g(0, o) * x(0, i));
    CHECK(back.grads.biases[0][o] == g(0, o));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.grad_input(0, i) ==
          doctest::Approx(g(0, 0) * p.weights[0](0, i) + g(0, 1) * p.weights[0](1, i)));
  }
}

TEST_CASE("mlp_backward: random nets agree with finite differences") {
  // Depths 1-4, widths 1-32: parameter and input gradients.
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t depth = 1 + rng.below(4);
    const auto p = random_net(rng, depth, 32, 500 + trial);
    Matrix x(3, p.input_dim());
    for (double& v : x.flat()) v = rng.uniform(-1.5, 1.5);
    Matrix t(3, p.output_dim());
    for (double& v : t.flat()) v = rng.uniform(-1, 1);

    const auto fwd = mlp_forward(p, x);
    Matrix g(t.rows(), t.cols());
    for (std::size_t k = 0; k < g.size(); ++k) g.flat()[k] = fwd.output.flat()[k] - t.flat()[k];
    const auto back = mlp_backward(p, fwd.cache, g);

    const auto numeric = finite_diff_grad([&](const MlpParams& q) { return half_sq_loss(q, x, t); }, p, 1e-5);
    CHECK(max_relative_error(flatten(back.grads), flatten(numeric)) <= 1e-4);

    std::vector<double> xin(x.flat().begin(), x.flat().end());
    const auto numeric_in = finite_diff_grad(
        [&](std::span<const double> v) {
          return half_sq_loss(p, Matrix(x.rows(), x.cols(), {v.begin(), v.end()}), t);
        },
        xin, 1e-5);
    std::vector<double> gin(back.grad_input.flat().begin(), back.grad_input.flat().end());
    CHECK(max_relative_error(gin, numeric_in) <= 1e-4);
  }
}

TEST_CASE("mlp_backward: mismatched cache is rejected") {
  const auto p = init_params({2, 3, 1}, 1);
  const auto q = init_params({2, 3, 3, 1}, 1);
  const auto fwd = mlp_forward(p, Matrix(1, 2));
  CHECK_THROWS_AS(mlp_backward(q, fwd.cache, Matrix(1, 1)), ShapeError);
  CHECK_THROWS_AS(mlp_backward(p, fwd.cache, Matrix(2, 1)), ShapeError);
}

TEST_CASE("init_params: determinism, errors and variance") {
  CHECK(init_params({4, 8, 1}, 7) == init_params({4, 8, 1}, 7));
  CHECK_FALSE(init_params({4, 8, 1}, 7) == init_params({4, 8, 1}, 8));
  CHECK_THROWS_AS(init_params({4, 0, 1}, 1), ConfigError);
  CHECK_THROWS_AS(init_params({4}, 1), ConfigError);

  const auto p = init_params({256, 400}, 99);
  const auto w = p.weights[0].flat();
  REQUIRE(w.size() >= 100000);
  double mean = 0.0, var = 0.0;
  for (double v : w) mean += v;
  mean /= static_cast<double>(w.size());
  for (double v : w) var += (v - mean) * (v - mean);
  var /= static_cast<double>(w.size() - 1);
  const double limit = std::sqrt(6.0 / (256.0 + 400.0));
  const double nominal = limit * limit / 3.0;
  CHECK(std::abs(var - nominal) <= 0.2 * nominal);
  for (double b : p.biases[0]) CHECK(b == 0.0);
}

TEST_CASE("adam_step: documented cases") {
  SUBCASE("zero gradient leaves params unchanged and counts the step") {
    auto p = init_params({2, 3, 1}, 4);
    const auto before = p;
    auto st = AdamState::fresh(p);
    adam_step(p, MlpGrads::zeros_like(p), st, 1e-3);
    CHECK(p == before);
    CHECK(st.t == 1);
  }
  SUBCASE("first step on g = 1 moves by -lr / (1 + eps)") {
    auto p = init_params({1, 1}, 4);
    const double w0 = p.weights[0](0, 0);
    auto g = MlpGrads::zeros_like(p);
    g.weights[0](0, 0) = 1.0;
    auto st = AdamState::fresh(p);
    const double lr = 0.01;
    adam_step(p, g, st, lr);
    // m_hat = 1, v_hat = 1 after bias correction.
    CHECK(p.weights[0](0, 0) - w0 == doctest::Approx(-lr / (1.0 + 1e-8)).epsilon(1e-12));
  }
  SUBCASE("second identical step is no larger than the first") {
    auto p = init_params({1, 1}, 4);
    auto g = MlpGrads::zeros_like(p);
    g.weights[0](0, 0) = 0.37;
    auto st = AdamState::fresh(p);
    const double w0 = p.weights[0](0, 0);
    adam_step(p, g, st, 0.01);
    const double w1 = p.weights[0](0, 0);
    adam_step(p, g, st, 0.01);
    const double w2 = p.weights[0](0, 0);
    CHECK(std::abs(w2 - w1) <= std::abs(w1 - w0) * (1 + 1e-9));
    for (double v : st.v.weights[0].flat()) CHECK(v >= 0.0);
  }
}

TEST_CASE("adam_step: errors") {
  auto p = init_params({2, 3, 1}, 4);
  auto st = AdamState::fresh(p);
  auto g = MlpGrads::zeros_like(p);
  CHECK_THROWS_AS(adam_step(p, g, st, 0.0), ConfigError);
  g.biases[1][0] = NAN;
  const auto before = p;
  try {
    adam_step(p, g, st, 1e-3);
    FAIL("expected OptimizerError");
  } catch (const OptimizerError& e) {
    CHECK(e.layer() == 1);
  }
  CHECK(p == before);
  CHECK(st.t == 0);
}

TEST_CASE("adam_update: permuting coordinates permutes the update") {
  Rng rng(77);
  const std::size_t n = 50;
  std::vector<double> p(n), g(n), m(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = rng.uniform(-1, 1);
    g[i] = rng.uniform(-1, 1);
    m[i] = rng.uniform(-0.1, 0.1);
    v[i] = rng.uniform(0, 0.1);
  }
  const auto perm = [&] {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n - 1; i > 0; --i) std::swap(idx[i], idx[rng.below(i + 1)]);
    return idx;
  }();
  auto pp = p, gp = g, mp = m, vp = v;
  for (std::size_t i = 0; i < n; ++i) {
    pp[i] = p[perm[i]];
    gp[i] = g[perm[i]];
    mp[i] = m[perm[i]];
    vp[i] = v[perm[i]];
  }
  adam_update(p, g, m, v, 3, AdamHyper{}, 1e-3);
  adam_update(pp, gp, mp, vp, 3, AdamHyper{}, 1e-3);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(pp[i] == p[perm[i]]);
    CHECK(vp[i] == v[perm[i]]);
  }
}

TEST_CASE("finite_diff_grad: simple losses") {
  const std::vector<double> theta{3.0};
  const auto q = finite_diff_grad([](std::span<const double> t) { return 0.5 * t[0] * t[0]; }, theta, 1e-5);
  CHECK(std::abs(q[0] - 3.0) <= 1e-8);
  const auto l = finite_diff_grad([](std::span<const double> t) { return 2.75 * t[0]; }, theta, 1e-5);
  CHECK(l[0] == doctest::Approx(2.75).epsilon(1e-10));
  CHECK_THROWS_AS(finite_diff_grad([](std::span<const double>) { return 0.0; }, theta, 0.0), ConfigError);
}

TEST_CASE("checkpoint: round trip is exact and byte-stable") {
  Rng rng(6);
  auto p = random_net(rng, 3, 9, 3);
  p.activations[1] = Activation::Linear;
  auto st = AdamState::fresh(p);
  auto g = MlpGrads::zeros_like(p);
  for (auto& w : g.weights) {
    for (double& v : w.flat()) v = rng.uniform(-1, 1);
  }
  adam_step(p, g, st, 1e-2);

  std::stringstream a;
  write_checkpoint(a, p, st);
  const std::string bytes = a.str();
  CHECK(bytes.substr(0, 4) == "MLP1");
  std::stringstream in(bytes);
  const auto ck = read_checkpoint(in);
  CHECK(ck.params == p);
  CHECK(ck.adam.m == st.m);
  CHECK(ck.adam.v == st.v);
  CHECK(ck.adam.t == 1);
  std::stringstream b;
  write_checkpoint(b, ck.params, ck.adam);
  CHECK(b.str() == bytes);

  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_checkpoint(truncated), IoError);
  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream wrong(bad);
  CHECK_THROWS_AS(read_checkpoint(wrong), IoError);
}

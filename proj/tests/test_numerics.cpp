#include <doctest.h>

#include <cmath>

#include "memlab/numerics.hpp"
#include "memlab/rng.hpp"

using namespace memlab;
using numerics::Tensor;

namespace {

Tensor random_tensor(std::vector<std::int64_t> shape, Rng& rng, double scale = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto& v : t.values) v = rng.normal(0.0, scale);
  return t;
}

// relative elementwise comparison on elements with |expected| > floor
void check_close(const std::vector<double>& actual, const std::vector<double>& expected,
                 double rel_tol, double floor = 1e-6) {
  REQUIRE(actual.size() == expected.size());
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (std::abs(expected[i]) <= floor) continue;
    const double rel = std::abs(actual[i] - expected[i]) / std::abs(expected[i]);
    CHECK_MESSAGE(rel <= rel_tol, "element ", i, ": ", actual[i], " vs ", expected[i]);
  }
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("matmul identity") {
  Rng rng(11);
  Tensor a = random_tensor({3, 3}, rng);
  Tensor eye = Tensor::zeros({3, 3});
  for (int i = 0; i < 3; ++i) eye.values[i * 3 + i] = 1.0;
  const Tensor out = numerics::matmul(a, eye);
  CHECK(out.values == a.values);
}

TEST_CASE("matmul 1x1") {
  Tensor a({1, 1}, {2.0});
  Tensor b({1, 1}, {3.0});
  CHECK(numerics::matmul(a, b).values[0] == 6.0);
}

TEST_CASE("matmul shape error names both shapes") {
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({4, 2});
  try {
    numerics::matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const numerics::ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("[4x2]") != std::string::npos);
  }
}

TEST_CASE("matmul backward matches finite differences and row-sum identity") {
  Rng rng(42);
  Tensor a = random_tensor({3, 4}, rng);
  Tensor b = random_tensor({4, 2}, rng);

  // d(sum(a*b))/da: backward with all-ones out grad
  Tensor ones = Tensor::zeros({3, 2});
  std::fill(ones.values.begin(), ones.values.end(), 1.0);
  Tensor a_work = a, b_work = b;
  numerics::matmul_backward(a_work, b_work, ones);

  // analytic: grad a[i][k] = sum_j b[k][j], broadcast over rows
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 4; ++k) {
      double row_sum = 0.0;
      for (int j = 0; j < 2; ++j) row_sum += b.values[k * 2 + j];
      CHECK(a_work.grad[i * 4 + k] == doctest::Approx(row_sum).epsilon(1e-12));
    }
  }

  auto f_of_a = [&](const Tensor& x) {
    const Tensor out = numerics::matmul(x, b);
    double s = 0.0;
    for (double v : out.values) s += v;
    return s;
  };
  const Tensor fd = numerics::finite_difference_gradient(f_of_a, a, 1e-5);
  check_close(a_work.grad, fd.values, 1e-6);

  auto f_of_b = [&](const Tensor& x) {
    const Tensor out = numerics::matmul(a, x);
    double s = 0.0;
    for (double v : out.values) s += v;
    return s;
  };
  const Tensor fd_b = numerics::finite_difference_gradient(f_of_b, b, 1e-5);
  check_close(b_work.grad, fd_b.values, 1e-6);
}

TEST_CASE("cross entropy on uniform logits equals ln V") {
  const std::int64_t V = 11;
  Tensor logits = Tensor::zeros({3, V});
  std::fill(logits.values.begin(), logits.values.end(), 0.7);
  const std::vector<std::int32_t> targets = {0, 5, 10};
  const auto result = numerics::softmax_cross_entropy(logits, targets);
  CHECK(result.loss == doctest::Approx(std::log(static_cast<double>(V))).epsilon(1e-12));
}

TEST_CASE("cross entropy with a +30 margin is ~0") {
  Tensor logits = Tensor::zeros({2, 5});
  logits.values[0 * 5 + 2] = 30.0;
  logits.values[1 * 5 + 4] = 30.0;
  const std::vector<std::int32_t> targets = {2, 4};
  const auto result = numerics::softmax_cross_entropy(logits, targets);
  CHECK(result.loss < 1e-9);
  CHECK(result.loss >= 0.0);
}

TEST_CASE("cross entropy rejects out-of-range targets") {
  Tensor logits = Tensor::zeros({1, 4});
  const std::vector<std::int32_t> targets = {4};
  CHECK_THROWS_AS(numerics::softmax_cross_entropy(logits, targets),
                  numerics::NumericError);
}

TEST_CASE("cross entropy loss and gradient match finite differences") {
  Rng rng(7);
  Tensor logits = random_tensor({5, 7}, rng, 1.5);
  std::vector<std::int32_t> targets(5);
  for (auto& t : targets) t = static_cast<std::int32_t>(rng.below(7));

  const auto result = numerics::softmax_cross_entropy(logits, targets);
  auto f = [&](const Tensor& x) { return numerics::softmax_cross_entropy(x, targets).loss; };
  const Tensor fd = numerics::finite_difference_gradient(f, logits, 1e-5);
  check_close(result.logits_grad.values, fd.values, 1e-4);
}

TEST_CASE("softmax rows reconstructed from the gradient sum to 1") {
  Rng rng(19);
  const std::int64_t T = 6, V = 9;
  Tensor logits = random_tensor({T, V}, rng, 2.0);
  std::vector<std::int32_t> targets(T);
  for (auto& t : targets) t = static_cast<std::int32_t>(rng.below(V));
  const auto result = numerics::softmax_cross_entropy(logits, targets);
  // grad = (softmax - onehot)/T, so softmax = grad*T + onehot
  for (std::int64_t t = 0; t < T; ++t) {
    double row_sum = 0.0;
    for (std::int64_t v = 0; v < V; ++v) {
      double p = result.logits_grad.values[t * V + v] * static_cast<double>(T);
      if (v == targets[t]) p += 1.0;
      CHECK(p >= -1e-12);
      row_sum += p;
    }
    CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("adam zero gradient leaves parameters unchanged") {
  numerics::ParameterStore params;
  params.emplace("w", Tensor({2}, {1.5, -0.5}));
  numerics::ParameterStore grads;
  grads.emplace("w", Tensor::zeros({2}));
  auto state = numerics::AdamState::init(params);
  numerics::adam_step(params, grads, state, 0.1);
  CHECK(params.at("w").values[0] == 1.5);
  CHECK(params.at("w").values[1] == -0.5);
  CHECK(state.step_count == 1);
}

TEST_CASE("adam first step with unit gradient is ~ -lr (hand derived)") {
  // m = 0.1, v = 0.001, m_hat = 1, v_hat = 1 -> update = -lr/(1 + eps)
  numerics::ParameterStore params;
  params.emplace("w", Tensor({1}, {0.0}));
  numerics::ParameterStore grads;
  grads.emplace("w", Tensor({1}, {1.0}));
  auto state = numerics::AdamState::init(params);
  numerics::adam_step(params, grads, state, 0.1);
  CHECK(params.at("w").values[0] == doctest::Approx(-0.1).epsilon(1e-7));
}

TEST_CASE("adam symmetry: identical params and grads update identically") {
  numerics::ParameterStore params;
  params.emplace("a", Tensor({2}, {0.3, 0.3}));
  params.emplace("b", Tensor({2}, {0.3, 0.3}));
  numerics::ParameterStore grads;
  grads.emplace("a", Tensor({2}, {0.7, 0.7}));
  grads.emplace("b", Tensor({2}, {0.7, 0.7}));
  auto state = numerics::AdamState::init(params);
  numerics::adam_step(params, grads, state, 0.01);
  CHECK(params.at("a").values == params.at("b").values);
  CHECK(params.at("a").values[0] == params.at("a").values[1]);
}

TEST_CASE("adam aborts on non-finite gradients naming the parameter") {
  numerics::ParameterStore params;
  params.emplace("w.bad", Tensor({1}, {0.0}));
  numerics::ParameterStore grads;
  grads.emplace("w.bad", Tensor({1}, {std::nan("")}));
  auto state = numerics::AdamState::init(params);
  try {
    numerics::adam_step(params, grads, state, 0.1);
    FAIL("expected NumericError");
  } catch (const numerics::NumericError& e) {
    CHECK(std::string(e.what()).find("w.bad") != std::string::npos);
  }
}

TEST_CASE("finite differences: f = sum gives all ones") {
  Rng rng(3);
  Tensor x = random_tensor({2, 3}, rng);
  auto f = [](const Tensor& t) {
    double s = 0.0;
    for (double v : t.values) s += v;
    return s;
  };
  const Tensor g = numerics::finite_difference_gradient(f, x, 1e-5);
  for (double v : g.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("finite differences: f = 0.5 |x|^2 gives x") {
  Rng rng(4);
  Tensor x = random_tensor({5}, rng);
  auto f = [](const Tensor& t) {
    double s = 0.0;
    for (double v : t.values) s += 0.5 * v * v;
    return s;
  };
  const Tensor g = numerics::finite_difference_gradient(f, x, 1e-5);
  check_close(g.values, x.values, 1e-8);
}

TEST_CASE("property: 20 random instances of each op pass the gradient check") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = 1 + static_cast<std::int64_t>(rng.below(4));
    const auto k = 1 + static_cast<std::int64_t>(rng.below(4));
    const auto n = 1 + static_cast<std::int64_t>(rng.below(4));

    // matmul under a fixed random weighting (general out-gradient case)
    Tensor a = random_tensor({m, k}, rng);
    Tensor b = random_tensor({k, n}, rng);
    Tensor weights = random_tensor({m, n}, rng);
    Tensor a_work = a, b_work = b;
    numerics::matmul_backward(a_work, b_work, weights);
    auto weighted = [&](const Tensor& out) {
      double s = 0.0;
      for (std::size_t i = 0; i < out.values.size(); ++i) {
        s += out.values[i] * weights.values[i];
      }
      return s;
    };
    const Tensor fd_a = numerics::finite_difference_gradient(
        [&](const Tensor& x) { return weighted(numerics::matmul(x, b)); }, a, 1e-5);
    const Tensor fd_b = numerics::finite_difference_gradient(
        [&](const Tensor& x) { return weighted(numerics::matmul(a, x)); }, b, 1e-5);
    check_close(a_work.grad, fd_a.values, 1e-3);
    check_close(b_work.grad, fd_b.values, 1e-3);

    // cross entropy
    const auto t_rows = 1 + static_cast<std::int64_t>(rng.below(5));
    const auto vocab = 2 + static_cast<std::int64_t>(rng.below(8));
    Tensor logits = random_tensor({t_rows, vocab}, rng, 2.0);
    std::vector<std::int32_t> targets(t_rows);
    for (auto& t : targets) t = static_cast<std::int32_t>(rng.below(vocab));
    const auto ce = numerics::softmax_cross_entropy(logits, targets);
    const Tensor fd_l = numerics::finite_difference_gradient(
        [&](const Tensor& x) { return numerics::softmax_cross_entropy(x, targets).loss; },
        logits, 1e-5);
    check_close(ce.logits_grad.values, fd_l.values, 1e-3);
  }
}

TEST_CASE("bit-identical results across two runs with the same seed") {
  auto run = [] {
    Rng rng(123);
    Tensor a = random_tensor({4, 4}, rng);
    Tensor b = random_tensor({4, 4}, rng);
    return numerics::matmul(a, b).values;
  };
  CHECK(run() == run());
}

TEST_CASE("tensor shape/value mismatch is rejected") {
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), numerics::ShapeError);
}

}  // TEST_SUITE

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rmsa/error.hpp"
#include "rmsa/kernels.hpp"
#include "rmsa/neuralnet.hpp"

using namespace rmsa;

namespace {

const NetworkShape kSmall{6, 2, 8, 4};  // 2x8 hidden, 6 inputs

void zero(ParamSet& p) {
  for (double& x : p.policy.params()) x = 0.0;
  for (double& x : p.value.params()) x = 0.0;
}

std::vector<TrainingSample> random_batch(std::mt19937_64& rng, int n, int input, int actions) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<TrainingSample> b(static_cast<std::size_t>(n));
  for (auto& s : b) {
    s.state.resize(static_cast<std::size_t>(input));
    for (double& x : s.state) x = g(rng);
    s.action = static_cast<int>(rng() % static_cast<unsigned>(actions));
    s.advantage = g(rng);
    s.target = g(rng);
  }
  return b;
}

// straight loops, no kernels
std::vector<double> naive_forward(const Mlp& m, std::vector<double> x) {
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    std::vector<double> y(m.fan_out(l));
    for (std::size_t r = 0; r < y.size(); ++r) {
      double acc = m.bias(l)[r];
      for (std::size_t c = 0; c < x.size(); ++c) acc += m.weight(l)[r * m.fan_in(l) + c] * x[c];
      y[r] = (l + 1 < m.layer_count()) ? (acc >= 0 ? acc : std::exp(acc) - 1.0) : acc;
    }
    x = std::move(y);
  }
  return x;
}

struct GradCheck {
  double max_rel = 0.0;
  double aggregate = 0.0;
};

GradCheck check_gradient(ParamSet& p, std::span<double> params, const std::vector<double>& analytic,
                         const std::function<double()>& loss) {
  GradCheck out;
  double diff2 = 0, a2 = 0, n2 = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double num = oracle::central_difference(loss, params[i], 1e-5);
    out.max_rel = std::max(out.max_rel, oracle::relative_error(analytic[i], num, 1e-6));
    diff2 += (analytic[i] - num) * (analytic[i] - num);
    a2 += analytic[i] * analytic[i];
    n2 += num * num;
  }
  (void)p;
  out.aggregate = std::sqrt(diff2) / std::max({std::sqrt(a2), std::sqrt(n2), 1e-12});
  return out;
}

}  // namespace

TEST_CASE("kernel selection is reported") {
  MESSAGE("kernels: " << kernels::active().name);
}

TEST_CASE("ELU") {
  CHECK(elu(0.0) == 0.0);
  CHECK(elu(2.5) == 2.5);
  CHECK(elu(-std::log(2.0)) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(elu_derivative(1.0) == 1.0);
  CHECK(elu_derivative(-1.0) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("layer dimensions") {
  const NetworkShape s{54, 5, 128, 5};
  const ParamSet p = init_params(s, 1);
  CHECK(p.policy.dims() == std::vector<int>{54, 128, 128, 128, 128, 128, 5});
  CHECK(p.value.dims() == std::vector<int>{54, 128, 128, 128, 128, 128, 1});
  CHECK(p.policy.param_count() == 54u * 128 + 128 + 4 * (128 * 128 + 128) + 128 * 5 + 5);
  CHECK(p.all_finite());
  CHECK(init_params(s, 1) == p);
  CHECK_FALSE(init_params(s, 2) == p);
}

TEST_CASE("forward matches a naive evaluation") {
  std::mt19937_64 rng(3);
  const ParamSet p = init_params({54, 5, 128, 5}, 9);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(54);
    for (double& v : x) v = g(rng);
    const auto want = naive_forward(p.policy, x);
    Mlp::Activations cache;
    p.policy.forward(x, cache);
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(cache.output()[i] == doctest::Approx(want[i]).epsilon(1e-12));
    CHECK(forward_value(p, x) == doctest::Approx(naive_forward(p.value, x)[0]).epsilon(1e-12));
  }
  Mlp::Activations cache;
  CHECK_THROWS_AS(p.policy.forward(std::vector<double>(53), cache), ContractError);
}

TEST_CASE("zero weights give a uniform policy and zero value") {
  ParamSet p = init_params({6, 2, 8, 5}, 1);
  zero(p);
  const std::vector<double> s{1, -2, 3, 0.5, 0, 7};
  for (double pi : forward_policy(p, s)) CHECK(pi == doctest::Approx(0.2));
  CHECK(forward_value(p, s) == 0.0);
}

TEST_CASE("loss values on hand-computed cases") {
  ParamSet p = init_params({6, 2, 8, 2}, 1);
  zero(p);
  std::vector<TrainingSample> b{{std::vector<double>(6, 0.3), 0, 1.0, 0.5}};
  CHECK(policy_loss(p, b, {0.0}) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(policy_loss(p, b, {0.01}) == doctest::Approx(0.686216).epsilon(1e-6));
  CHECK(policy_loss(p, b, {0.01, EntropySign::Literal}) == doctest::Approx(0.700079).epsilon(1e-6));
  CHECK(value_loss(p, b) == 0.25);
  b.push_back({std::vector<double>(6, 0.1), 1, -1.0, 1.0});
  b[0].target = 0.0;
  CHECK(value_loss(p, b) == 0.5);
  CHECK(policy_loss(p, b, {0.0}) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("softmax and entropy properties") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 5.0);
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = 1 + rng() % 25;
    std::vector<double> z(n);
    for (double& v : z) v = g(rng);
    if (t % 100 == 0) z[0] = 800.0;  // overflow guard
    const auto p = softmax(z);
    double sum = 0;
    for (double v : p) {
      REQUIRE(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
    const double h = entropy(p);
    CHECK(h >= -1e-12);
    CHECK(h <= std::log(double(n)) + 1e-12);
  }
  CHECK(entropy(std::vector<double>{1.0, 0.0, 0.0}) == 0.0);
  CHECK(entropy(softmax(std::vector<double>(7, 3.0))) == doctest::Approx(std::log(7.0)));
}

TEST_CASE("finite-difference gradient check") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 4; ++trial) {
    ParamSet p = init_params(kSmall, 100 + static_cast<std::uint64_t>(trial));
    // full-scale output layers so gradients are not tiny
    for (double& x : p.policy.params()) x *= 3.0;
    const auto batch = random_batch(rng, 7, 6, 4);
    for (auto sign : {EntropySign::Bonus, EntropySign::Literal})
      for (double alpha : {0.0, 0.01, 0.5}) {
        const LossConfig lc{alpha, sign};
        const BackwardResult r = backward(p, batch, lc);
        CHECK(r.policy_loss == doctest::Approx(policy_loss(p, batch, lc)).epsilon(1e-12));
        CHECK(r.value_loss == doctest::Approx(value_loss(p, batch)).epsilon(1e-12));

        const auto gp = check_gradient(p, p.policy.params(), r.grads.policy,
                                       [&] { return policy_loss(p, batch, lc); });
        CAPTURE(alpha);
        CHECK(gp.max_rel < 1e-4);
        CHECK(gp.aggregate < 1e-6);
      }
    const BackwardResult r = backward(p, batch, {});
    const auto gv = check_gradient(p, p.value.params(), r.grads.value, [&] { return value_loss(p, batch); });
    CHECK(gv.max_rel < 1e-4);
    CHECK(gv.aggregate < 1e-6);
  }
}

TEST_CASE("entropy term gradient alone") {
  std::mt19937_64 rng(23);
  ParamSet p = init_params(kSmall, 5);
  for (double& x : p.policy.params()) x *= 3.0;
  auto batch = random_batch(rng, 5, 6, 4);
  for (auto& s : batch) s.advantage = 0.0;
  const LossConfig lc{1.0};
  const auto r = backward(p, batch, lc);
  const auto gp = check_gradient(p, p.policy.params(), r.grads.policy, [&] { return policy_loss(p, batch, lc); });
  CHECK(gp.max_rel < 1e-4);
}

TEST_CASE("zero advantage and zero alpha give a zero policy gradient; a fit batch gives a zero value gradient") {
  std::mt19937_64 rng(29);
  const ParamSet p = init_params(kSmall, 7);
  auto batch = random_batch(rng, 6, 6, 4);
  for (auto& s : batch) {
    s.advantage = 0.0;
    s.target = forward_value(p, s.state);
  }
  const auto r = backward(p, batch, {0.0});
  for (double g : r.grads.policy) CHECK(g == 0.0);
  for (double g : r.grads.value) CHECK(std::abs(g) < 1e-15);
  CHECK(r.value_loss < 1e-30);
}

TEST_CASE("Adam steps") {
  ParamSet p = init_params({1, 0, 1, 1}, 1);
  zero(p);
  GradientSet g = GradientSet::zeros_like(p);
  std::fill(g.policy.begin(), g.policy.end(), 1.0);
  std::fill(g.value.begin(), g.value.end(), -2.0);
  AdamConfig cfg;
  cfg.learning_rate = 1e-3;
  adam_apply(p, g, cfg);
  for (double x : p.policy.params()) CHECK(x == doctest::Approx(-1e-3).epsilon(1e-6));
  for (double x : p.value.params()) CHECK(x == doctest::Approx(1e-3).epsilon(1e-6));
  CHECK(p.adam.step == 1);
  const ParamSet once = p;
  adam_apply(p, g, cfg);
  CHECK_FALSE(p == once);
  CHECK(p.policy.params()[0] == doctest::Approx(-2e-3).epsilon(1e-6));

  ParamSet q = init_params(kSmall, 3);
  const ParamSet q0 = q;
  adam_apply(q, GradientSet::zeros_like(q), {});
  CHECK(q.policy == q0.policy);
  CHECK(q.value == q0.value);

  GradientSet wrong = GradientSet::zeros_like(q);
  wrong.policy.pop_back();
  CHECK_THROWS_AS(adam_apply(q, wrong, {}), ContractError);
}

TEST_CASE("gradient clipping caps the step input") {
  ParamSet p = init_params({1, 0, 1, 1}, 1);
  GradientSet g = GradientSet::zeros_like(p);
  std::fill(g.policy.begin(), g.policy.end(), 30.0);
  std::fill(g.value.begin(), g.value.end(), 40.0);
  AdamConfig cfg;
  cfg.grad_norm_cap = 1.0;
  adam_apply(p, g, cfg);
  // first-moment estimate is (1 - beta1) * clipped gradient
  const double scale = 1.0 / g.norm();
  CHECK(p.adam.policy_m[0] == doctest::Approx(0.1 * 30.0 * scale));
}

TEST_CASE("property: long Adam runs stay finite") {
  std::mt19937_64 rng(31);
  ParamSet p = init_params({6, 1, 4, 3}, 2);
  AdamConfig cfg;
  cfg.learning_rate = 1e-3;
  for (int t = 0; t < 10000; ++t) {
    const auto batch = random_batch(rng, 4, 6, 3);
    const auto r = backward(p, batch, {});
    adam_apply(p, r.grads, cfg);
  }
  CHECK(p.all_finite());
  CHECK(p.adam.step == 10000);
}

TEST_CASE("checkpoint round trip is exact") {
  std::mt19937_64 rng(37);
  ParamSet p = init_params(kSmall, 11);
  const auto batch = random_batch(rng, 5, 6, 4);
  for (int i = 0; i < 3; ++i) adam_apply(p, backward(p, batch, {}).grads, {});
  std::stringstream buf;
  save_checkpoint(p, buf);
  const ParamSet q = load_checkpoint(buf);
  CHECK(q == p);

  std::string bytes = buf.str();
  bytes[0] = 'X';
  std::istringstream bad(bytes);
  CHECK_THROWS_AS(load_checkpoint(bad), Error);
  std::istringstream cut(buf.str().substr(0, 40));
  CHECK_THROWS_AS(load_checkpoint(cut), Error);
}

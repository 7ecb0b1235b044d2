#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <vector>

#include "qstab/errors.hpp"
#include "qstab/mlp.hpp"

using namespace qstab;

namespace {

// straight-line re-implementation of the forward pass, kept independent of
// the library code path on purpose
std::vector<double> forward_reference(const LayerStack& p,
                                      const std::vector<double>& input) {
  std::vector<double> h = input;
  for (std::size_t l = 0; l < p.w.size(); ++l) {
    std::vector<double> out(p.w[l].rows());
    for (int i = 0; i < p.w[l].rows(); ++i) {
      double acc = p.b[l](i);
      for (int j = 0; j < p.w[l].cols(); ++j) acc += p.w[l](i, j) * h[j];
      out[i] = acc;
    }
    if (l + 1 < p.w.size())
      for (double& v : out) v = std::tanh(v);
    h = std::move(out);
  }
  return h;
}

double loss_for_fd(const LayerStack& p, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& weights) {
  return weights.dot(mlp_forward(p, x));
}

}  // namespace

TEST_CASE("degenerate parameter values") {
  LayerStack zero = make_zero_mlp(3, {4, 4}, 2);
  Eigen::VectorXd x(3);
  x << 1.0, -2.0, 0.5;
  CHECK(mlp_forward(zero, x).isZero(0.0));

  // zero weights, bias on the output layer passes straight through
  zero.b.back() << 3.5, -1.25;
  const Eigen::VectorXd out = mlp_forward(zero, x);
  CHECK(out(0) == 3.5);
  CHECK(out(1) == -1.25);
}

TEST_CASE("forward pass matches the straight-line reference") {
  RandomStream rng(31);
  const LayerStack p = make_mlp(5, {7, 6}, 3, std::sqrt(2.0), 0.5, rng);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> input(5);
    for (double& v : input) v = rng.uniform(-3.0, 3.0);
    const Eigen::VectorXd x =
        Eigen::Map<const Eigen::VectorXd>(input.data(), 5);
    const Eigen::VectorXd got = mlp_forward(p, x);
    const std::vector<double> want = forward_reference(p, input);
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(got(i) - want[i]) <= 1e-12);
  }
  Eigen::VectorXd bad(4);
  bad.setZero();
  CHECK_THROWS_AS(mlp_forward(p, bad), ContractError);
}

TEST_CASE("backward matches central finite differences") {
  RandomStream rng(77);
  LayerStack p = make_mlp(3, {8, 8}, 2, std::sqrt(2.0), 1.0, rng);
  Eigen::VectorXd x(3);
  x << 0.7, -1.1, 2.3;
  Eigen::VectorXd wout(2);
  wout << 1.3, -0.4;

  ForwardCache cache;
  mlp_forward(p, x, cache);
  LayerStack grads = LayerStack::zeros_like(p);
  mlp_backward(p, cache, wout, grads);

  const double h = 1e-5;
  auto check_entry = [&](double* param, double analytic) {
    const double saved = *param;
    *param = saved + h;
    const double up = loss_for_fd(p, x, wout);
    *param = saved - h;
    const double down = loss_for_fd(p, x, wout);
    *param = saved;
    const double fd = (up - down) / (2.0 * h);
    CHECK(std::abs(fd - analytic) <=
          1e-5 * std::max({1.0, std::abs(fd), std::abs(analytic)}));
  };

  for (std::size_t l = 0; l < p.w.size(); ++l) {
    for (int i = 0; i < p.w[l].rows(); ++i) {
      for (int j = 0; j < p.w[l].cols(); ++j)
        check_entry(&p.w[l](i, j), grads.w[l](i, j));
      check_entry(&p.b[l](i), grads.b[l](i));
    }
  }
}

TEST_CASE("backward zero output gradient gives zero parameter gradients") {
  RandomStream rng(5);
  const LayerStack p = make_mlp(4, {6}, 3, 1.0, 1.0, rng);
  ForwardCache cache;
  mlp_forward(p, Eigen::VectorXd::Ones(4), cache);
  LayerStack grads = LayerStack::zeros_like(p);
  mlp_backward(p, cache, Eigen::VectorXd::Zero(3), grads);
  for (const auto& m : grads.w) CHECK(m.isZero(0.0));
  for (const auto& v : grads.b) CHECK(v.isZero(0.0));
}

TEST_CASE("single linear layer gradient is the outer product") {
  LayerStack p = make_zero_mlp(3, {}, 2);
  p.w[0] << 1, 2, 3, 4, 5, 6;
  Eigen::VectorXd x(3);
  x << 0.5, -1.0, 2.0;
  ForwardCache cache;
  mlp_forward(p, x, cache);
  LayerStack grads = LayerStack::zeros_like(p);
  Eigen::VectorXd og(2);
  og << 2.0, -1.0;
  mlp_backward(p, cache, og, grads);
  CHECK((grads.w[0] - og * x.transpose()).norm() == 0.0);
  CHECK((grads.b[0] - og).norm() == 0.0);
}

TEST_CASE("orthogonal init produces gain-scaled orthonormal columns") {
  RandomStream rng(12);
  const double gain = std::sqrt(2.0);
  const Eigen::MatrixXd w = orthogonal_matrix(64, 4, gain, rng);
  const Eigen::MatrixXd gram = w.transpose() * w;
  CHECK((gram - gain * gain * Eigen::MatrixXd::Identity(4, 4)).norm() <= 1e-9);

  // wide matrices come out with orthonormal rows instead
  const Eigen::MatrixXd w2 = orthogonal_matrix(2, 64, 0.01, rng);
  const Eigen::MatrixXd gram2 = w2 * w2.transpose();
  CHECK((gram2 - 1e-4 * Eigen::MatrixXd::Identity(2, 2)).norm() <= 1e-12);
}

TEST_CASE("adam") {
  RandomStream rng(9);
  LayerStack p = make_zero_mlp(1, {}, 1);
  AdamState st = AdamState::init(p, 1e-3, 0.9, 0.9);

  // zero gradient: parameters unchanged, step counter advances
  LayerStack g = LayerStack::zeros_like(p);
  adam_step(p, g, st);
  CHECK(st.step == 1);
  CHECK(p.w[0](0, 0) == 0.0);

  // first effective step has magnitude ~ lr
  p = make_zero_mlp(1, {}, 1);
  st = AdamState::init(p, 1e-3, 0.9, 0.9);
  g.w[0](0, 0) = 1.0;
  g.b[0](0) = 1.0;
  adam_step(p, g, st);
  CHECK(p.w[0](0, 0) == doctest::Approx(-1e-3).epsilon(1e-4));

  // descends f(w) = w^2 from w = 1
  LayerStack w1 = make_zero_mlp(1, {}, 1);
  w1.w[0](0, 0) = 1.0;
  AdamState opt = AdamState::init(w1, 0.1, 0.9, 0.9);
  LayerStack grad = LayerStack::zeros_like(w1);
  for (int i = 0; i < 100; ++i) {
    grad.w[0](0, 0) = 2.0 * w1.w[0](0, 0);
    adam_step(w1, grad, opt);
  }
  CHECK(std::abs(w1.w[0](0, 0)) < 0.1);

  grad.w[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(adam_step(w1, grad, opt), TrainingError);
}

TEST_CASE("categorical sampling") {
  RandomStream rng(2);
  Eigen::VectorXd logits(2);
  logits << 0.0, 0.0;
  long counts[2] = {0, 0};
  for (int i = 0; i < 20000; ++i) {
    const SampleResult s = categorical_sample(logits, rng);
    ++counts[s.action];
    CHECK(s.logprob == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  }
  CHECK(std::abs(counts[0] - 10000) < 400);

  logits << std::log(3.0), 0.0;
  const Eigen::VectorXd lsm = log_softmax(logits);
  CHECK(std::exp(lsm(0)) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(std::exp(lsm(1)) == doctest::Approx(0.25).epsilon(1e-12));

  // extreme logits stay finite and always pick the dominant action
  logits << 1000.0, 0.0;
  for (int i = 0; i < 100; ++i) {
    const SampleResult s = categorical_sample(logits, rng);
    CHECK(s.action == 0);
    CHECK(std::isfinite(s.logprob));
    CHECK(s.logprob == doctest::Approx(0.0));
  }
}

TEST_CASE("softmax probabilities sum to one; logprob equals log(prob)") {
  RandomStream rng(44);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd logits(4);
    for (int i = 0; i < 4; ++i) logits(i) = rng.uniform(-30.0, 30.0);
    const Eigen::VectorXd probs = log_softmax(logits).array().exp();
    CHECK(std::abs(probs.sum() - 1.0) <= 1e-12);
    const SampleResult s = categorical_sample(logits, rng);
    CHECK(std::abs(s.logprob - std::log(probs(s.action))) <= 1e-9);
  }
}

TEST_CASE("entropy and its gradient against finite differences") {
  RandomStream rng(3);
  Eigen::VectorXd logits(3);
  logits << 0.3, -1.2, 0.9;
  // uniform maximizes entropy
  CHECK(categorical_entropy(Eigen::VectorXd::Zero(3)) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));

  const Eigen::VectorXd g = entropy_grad(logits);
  const Eigen::VectorXd glp = logprob_grad(logits, 1);
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd up = logits, down = logits;
    up(i) += h;
    down(i) -= h;
    const double fd_ent =
        (categorical_entropy(up) - categorical_entropy(down)) / (2 * h);
    CHECK(std::abs(fd_ent - g(i)) <= 1e-6);
    const double fd_lp =
        (log_softmax(up)(1) - log_softmax(down)(1)) / (2 * h);
    CHECK(std::abs(fd_lp - glp(i)) <= 1e-6);
  }
}

TEST_CASE("checkpoint round-trip is bit exact") {
  RandomStream rng(10);
  const LayerStack p = make_mlp(4, {64, 64}, 2, std::sqrt(2.0), 0.01, rng);
  const std::string path =
      (std::filesystem::temp_directory_path() / "qstab_ckpt_test.bin").string();
  save_params(p, path);
  const LayerStack q = load_params(path);
  REQUIRE(q.w.size() == p.w.size());
  for (std::size_t l = 0; l < p.w.size(); ++l) {
    CHECK(q.w[l] == p.w[l]);
    CHECK(q.b[l] == p.b[l]);
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_params("/nonexistent/qstab.bin"), ConfigError);
}

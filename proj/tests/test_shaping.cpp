#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qstab/environment.hpp"
#include "qstab/errors.hpp"
#include "qstab/presets.hpp"
#include "qstab/rng.hpp"
#include "qstab/shaping.hpp"

using namespace qstab;

namespace {
State make_state(std::vector<int> queues) {
  State s;
  s.queues = std::move(queues);
  return s;
}
}  // namespace

TEST_CASE("lyapunov energy") {
  CHECK(lyapunov_value(make_state({3, 4}), 2.0) == 25.0);
  CHECK(lyapunov_value(make_state({2, 5}), 1.0) == 7.0);
  CHECK(lyapunov_value(make_state({0, 0, 0}), 3.5) == 0.0);
  // flags carry no energy
  State s = make_state({2, 2});
  s.flags = {1, 1};
  CHECK(lyapunov_value(s, 2.0) == 8.0);
  // non-integer exponent
  CHECK(lyapunov_value(make_state({4}), 1.5) == doctest::Approx(8.0));
  CHECK_THROWS_AS(lyapunov_value(make_state({1}), 0.0), ContractError);
}

TEST_CASE("energy is monotone in each queue coordinate") {
  RandomStream rng(5);
  for (int i = 0; i < 200; ++i) {
    std::vector<int> q = {rng.uniform_int(30), rng.uniform_int(30),
                          rng.uniform_int(30)};
    const double p = rng.uniform(0.2, 5.0);
    const double base = lyapunov_value(make_state(q), p);
    const int j = rng.uniform_int(3);
    q[j] += 1;
    CHECK(lyapunov_value(make_state(q), p) > base);
  }
}

TEST_CASE("cost variants") {
  const State next0 = make_state({0, 0});
  CHECK(optimality_cost_variant(3.0, next0, CostVariant::reciprocal) ==
        doctest::Approx(-0.25));
  CHECK(optimality_cost_variant(5.0, next0, CostVariant::exp_next) ==
        doctest::Approx(-1.0));
  CHECK(optimality_cost_variant(0.0, next0, CostVariant::identity) == 0.0);
  const State next = make_state({1, 1});
  CHECK(optimality_cost_variant(2.0, next, CostVariant::exp_next) ==
        doctest::Approx(-std::exp(-2.0)));
  CHECK_THROWS_AS(cost_variant_from_label("exp_current"), ConfigError);
  CHECK_THROWS_AS(cost_variant_from_label("nope"), ConfigError);
}

TEST_CASE("shaped cost") {
  ShapingSpec spec;
  spec.lyapunov_p = 2.0;
  CHECK(shaped_cost(make_state({2, 1}), make_state({1, 2}), 3.0, spec) ==
        doctest::Approx(3.0));
  const State same = make_state({4, 7});
  CHECK(shaped_cost(same, same, 7.0, spec) == doctest::Approx(7.0));

  ShapingSpec rec;
  rec.lyapunov_p = 1.0;
  rec.variant = CostVariant::reciprocal;
  CHECK(shaped_cost(make_state({0, 0}), make_state({1, 0}), 1.0, rec) ==
        doctest::Approx(0.5));

  ShapingSpec off;
  off.enabled = false;
  CHECK(shaped_cost(make_state({5, 5}), make_state({9, 9}), 18.0, off) == 18.0);
}

TEST_CASE("telescoped sum, single transition") {
  ShapingSpec spec;
  spec.lyapunov_p = 2.0;
  const TransitionRecord rec{make_state({1, 0}), 0.0, make_state({0, 0})};
  CHECK(telescoped_shaped_sum(std::span(&rec, 1), spec) ==
        doctest::Approx(-1.0));
}

TEST_CASE("telescoped sum rejects non-consecutive trajectories") {
  ShapingSpec spec;
  std::vector<TransitionRecord> traj = {
      {make_state({1, 0}), 1.0, make_state({1, 1})},
      {make_state({2, 2}), 1.0, make_state({2, 1})},
  };
  CHECK_THROWS_AS(telescoped_shaped_sum(traj, spec), ContractError);
}

// telescoping identity over random rollouts, every exponent and variant
TEST_CASE("telescoping identity on random trajectories") {
  for (const char* preset : {"sa-medium", "nmodel-veryhigh-2"}) {
    auto env = make_environment(load_preset(preset));
    RandomStream rng(17);
    for (double p : {1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0}) {
      for (CostVariant variant :
           {CostVariant::identity, CostVariant::reciprocal,
            CostVariant::exp_next}) {
        ShapingSpec spec;
        spec.lyapunov_p = p;
        spec.variant = variant;

        env->reset(rng);
        std::vector<TransitionRecord> traj;
        double variant_sum = 0.0;
        for (int t = 0; t < 1000; ++t) {
          TransitionRecord rec;
          rec.s = env->state();
          rec.true_cost = env->step({rng.uniform_int(env->num_actions())}, rng);
          rec.next = env->state();
          variant_sum +=
              optimality_cost_variant(rec.true_cost, rec.next, variant);
          traj.push_back(std::move(rec));
        }
        const double lhs = telescoped_shaped_sum(traj, spec);
        const double rhs = variant_sum + lyapunov_value(traj.back().next, p) -
                           lyapunov_value(traj.front().s, p);
        const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
        CHECK(std::abs(lhs - rhs) <= 1e-9 * scale);
      }
    }
  }
}

// with the identity variant, the finite-window shaped mean dominates the true
// mean minus the initial-energy term
TEST_CASE("finite-window lower bound, identity variant") {
  auto env = make_environment(load_preset("sa-medium"));
  RandomStream rng(11);
  ShapingSpec spec;
  spec.lyapunov_p = 2.0;
  env->reset(rng);
  const double l_start = lyapunov_value(env->state(), spec.lyapunov_p);
  const int horizon = 500;
  double shaped_sum = 0.0, true_sum = 0.0;
  for (int t = 0; t < horizon; ++t) {
    const State s = env->state();
    const double c = env->step({rng.uniform_int(env->num_actions())}, rng);
    shaped_sum += shaped_cost(s, env->state(), c, spec);
    true_sum += c;
  }
  CHECK(shaped_sum / horizon >=
        true_sum / horizon - l_start / horizon - 1e-12);
}

TEST_CASE("disabled shaping reproduces the plain objective on one stream") {
  auto env_a = make_environment(load_preset("sa-medium"));
  auto env_b = make_environment(load_preset("sa-medium"));
  RandomStream rng_a(3), rng_b(3);
  ShapingSpec off;
  off.enabled = false;
  env_a->reset(rng_a);
  env_b->reset(rng_b);
  for (int t = 0; t < 300; ++t) {
    const int a = t % 2;
    const State sa = env_a->state();
    const double ca = env_a->step({a}, rng_a);
    const double cb = env_b->step({a}, rng_b);
    CHECK(shaped_cost(sa, env_a->state(), ca, off) == cb);
  }
}

TEST_CASE("advice fires only for diluted linear shaping") {
  ShapingSpec spec;
  spec.lyapunov_p = 1.0;
  CHECK(!shaping_advice(spec).empty());
  spec.variant = CostVariant::reciprocal;
  CHECK(shaping_advice(spec).empty());
  spec.variant = CostVariant::identity;
  spec.lyapunov_p = 2.0;
  CHECK(shaping_advice(spec).empty());
  spec.lyapunov_p = 1.0;
  spec.enabled = false;
  CHECK(shaping_advice(spec).empty());
}

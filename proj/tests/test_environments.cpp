#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qstab/environment.hpp"
#include "qstab/errors.hpp"
#include "qstab/nmodel.hpp"
#include "qstab/presets.hpp"
#include "qstab/server_alloc.hpp"

using namespace qstab;

namespace {
ServerAllocConfig medium() {
  return std::get<ServerAllocConfig>(load_preset("sa-medium"));
}
}  // namespace

TEST_CASE("presets carry the documented parameters") {
  const ServerAllocConfig m = medium();
  CHECK(m.arrival_rates == std::vector<double>{0.2, 0.1});
  CHECK(m.service_probs == std::vector<double>{0.3, 0.8});
  CHECK(m.connect_probs == std::vector<double>{1.0, 1.0});

  const auto high = std::get<ServerAllocConfig>(load_preset("sa-high-faulty"));
  CHECK(high.connect_probs == std::vector<double>{0.95, 0.5});
  const auto vhigh =
      std::get<ServerAllocConfig>(load_preset("sa-veryhigh-faulty"));
  CHECK(vhigh.connect_probs == std::vector<double>{0.7, 0.5});

  const auto ten = std::get<ServerAllocConfig>(load_preset("sa-10queue"));
  CHECK(ten.num_queues() == 10);
  CHECK(ten.arrival_rates[3] == 0.4);
  CHECK(ten.service_probs[2] == 0.95);
  CHECK(ten.arrival_rates[8] == 0.015);
  CHECK(ten.connect_probs == std::vector<double>(10, 1.0));

  const auto nm = std::get<NModelConfig>(load_preset("nmodel-veryhigh-2"));
  CHECK(nm.lambda1 == 0.9);
  CHECK(nm.lambda2 == 0.8);
  CHECK(nm.mu1 == 1.0);
  CHECK(nm.mu2 == 0.9);
  CHECK(nm.mu3 == 0.8);
  CHECK(nm.holding_costs == std::vector<double>{3.0, 1.0});

  CHECK_THROWS_AS(load_preset("sa-nope"), ConfigError);
}

TEST_CASE("reset: degenerate range, determinism, pinned fixture") {
  ServerAllocConfig cfg = medium();
  cfg.init_max = 0;
  const State zero = server_alloc_reset(cfg, 42u);
  CHECK(zero.queues == std::vector<int>{0, 0});
  CHECK(zero.flags == std::vector<int>{1, 1});

  cfg.init_max = 10;
  CHECK(server_alloc_reset(cfg, 9u) == server_alloc_reset(cfg, 9u));

  const State s1 = server_alloc_reset(cfg, 1u);
  for (int q : s1.queues) {
    CHECK(q >= 0);
    CHECK(q <= 10);
  }
  // regression fixture, pinned from the seeded generator
  CHECK(s1.queues == std::vector<int>{1, 1});
  CHECK(s1.flags == std::vector<int>{1, 1});
}

TEST_CASE("server-alloc step follows the event ordering") {
  ServerAllocConfig cfg = medium();
  RandomStream rng(1);

  // departure certain, arrivals forced to [0, 1]
  cfg.arrival_rates = {0.0, 1.0};
  cfg.service_probs = {1.0, 0.8};
  State s;
  s.queues = {1, 0};
  s.flags = {1, 1};
  StepResult r = server_alloc_step(cfg, s, {0}, rng);
  CHECK(r.next.queues == std::vector<int>{0, 1});
  CHECK(r.true_cost == 1.0);

  // empty system with no arrivals is a fixed point
  cfg.arrival_rates = {0.0, 0.0};
  s.queues = {0, 0};
  r = server_alloc_step(cfg, s, {1}, rng);
  CHECK(r.next.queues == std::vector<int>{0, 0});
  CHECK(r.true_cost == 0.0);

  // disconnected queue cannot serve
  cfg.arrival_rates = {0.0, 0.0};
  cfg.service_probs = {1.0, 1.0};
  s.queues = {2, 3};
  s.flags = {1, 0};
  r = server_alloc_step(cfg, s, {1}, rng);
  CHECK(r.true_cost == 5.0);

  CHECK_THROWS_AS(server_alloc_step(cfg, s, {2}, rng), ContractError);
  CHECK_THROWS_AS(server_alloc_step(cfg, s, {-1}, rng), ContractError);
}

TEST_CASE("n-model event application") {
  State s;
  s.queues = {0, 0};
  State next = nmodel_apply_event(s, {0}, NModelEvent::arrival1);
  CHECK(next.queues == std::vector<int>{1, 0});

  s.queues = {1, 1};
  next = nmodel_apply_event(s, {1}, NModelEvent::service3_b1);
  CHECK(next.queues == std::vector<int>{1, 0});

  // serving an empty buffer is a null event
  s.queues = {0, 5};
  next = nmodel_apply_event(s, {0}, NModelEvent::service2_b0);
  CHECK(next.queues == std::vector<int>{0, 5});

  // server 2 pointed at buffer 1 does not serve buffer 0
  s.queues = {3, 2};
  next = nmodel_apply_event(s, {1}, NModelEvent::service2_b0);
  CHECK(next.queues == std::vector<int>{3, 2});
}

TEST_CASE("n-model step costs and contracts") {
  const auto nm = std::get<NModelConfig>(load_preset("nmodel-veryhigh-2"));
  CHECK(nm.uniformization_rate() == doctest::Approx(4.4));
  RandomStream rng(3);
  State s;
  s.queues = {0, 0};
  const StepResult r = nmodel_step(nm, s, {0}, rng);
  const double expected =
      3.0 * r.next.queues[0] + 1.0 * r.next.queues[1];
  CHECK(r.true_cost == expected);
  CHECK_THROWS_AS(nmodel_step(nm, s, {2}, rng), ContractError);

  NModelConfig bad = nm;
  bad.mu2 = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("stabilizability") {
  CHECK(stabilizability_check(medium()));
  CHECK(stabilizability_check(
      std::get<ServerAllocConfig>(load_preset("sa-high-faulty"))));
  CHECK(stabilizability_check(
      std::get<ServerAllocConfig>(load_preset("sa-veryhigh-faulty"))));
  CHECK(stabilizability_check(
      std::get<ServerAllocConfig>(load_preset("sa-10queue"))));

  ServerAllocConfig over = medium();
  over.arrival_rates = {0.5, 0.5};
  over.service_probs = {0.5, 0.5};
  CHECK_FALSE(stabilizability_check(over));

  ServerAllocConfig zero_p = medium();
  zero_p.service_probs = {0.0, 0.8};
  CHECK_THROWS_AS(stabilizability_check(zero_p), ConfigError);
}

TEST_CASE("queues never go negative; per-step change is bounded") {
  for (const char* preset : {"sa-medium", "sa-veryhigh-faulty", "sa-10queue"}) {
    const auto cfg = std::get<ServerAllocConfig>(load_preset(preset));
    auto env = make_environment(EnvConfig(cfg));
    RandomStream rng(101);
    env->reset(rng);
    for (int t = 0; t < 2000; ++t) {
      const int before = env->state().total_queue();
      env->step({rng.uniform_int(env->num_actions())}, rng);
      const int after = env->state().total_queue();
      for (int q : env->state().queues) CHECK(q >= 0);
      CHECK(after - before >= -1);
      CHECK(after - before <= cfg.num_queues());
    }
  }
}

TEST_CASE("n-model: exactly one buffer changes by one, or self-loop") {
  auto env = make_environment(load_preset("nmodel-veryhigh-2"));
  RandomStream rng(77);
  env->reset(rng);
  for (int t = 0; t < 2000; ++t) {
    const State before = env->state();
    env->step({rng.uniform_int(2)}, rng);
    const State& after = env->state();
    const int d0 = std::abs(after.queues[0] - before.queues[0]);
    const int d1 = std::abs(after.queues[1] - before.queues[1]);
    CHECK(d0 + d1 <= 1);
    for (int q : after.queues) CHECK(q >= 0);
  }
}

TEST_CASE("identical state, action and seed give identical outcomes") {
  const ServerAllocConfig cfg =
      std::get<ServerAllocConfig>(load_preset("sa-veryhigh-faulty"));
  State s;
  s.queues = {4, 9};
  s.flags = {1, 0};
  for (int trial = 0; trial < 20; ++trial) {
    RandomStream a(trial), b(trial);
    const StepResult ra = server_alloc_step(cfg, s, {0}, a);
    const StepResult rb = server_alloc_step(cfg, s, {0}, b);
    CHECK(ra.next == rb.next);
    CHECK(ra.true_cost == rb.true_cost);
  }
}

TEST_CASE("empirical arrival frequency matches the configured rates") {
  const ServerAllocConfig cfg = medium();
  auto env = make_environment(EnvConfig(cfg));
  RandomStream rng(2024);
  env->reset(rng);
  const long n = 100000;
  std::vector<long> arrivals(cfg.num_queues(), 0);
  for (long t = 0; t < n; ++t) {
    const State before = env->state();
    const Action a{static_cast<int>(t % cfg.num_queues())};
    env->step(a, rng);
    const State& after = env->state();
    for (int i = 0; i < cfg.num_queues(); ++i) {
      // a departure can mask an arrival on the served queue; count only the
      // unserved coordinates, where delta > 0 means exactly one arrival
      if (i == a.index) continue;
      if (after.queues[i] - before.queues[i] > 0) ++arrivals[i];
    }
  }
  // each unserved coordinate is observed ~n/2 times (round-robin actions)
  for (int i = 0; i < cfg.num_queues(); ++i) {
    const double observed = static_cast<double>(n) / 2.0;
    const double lambda = cfg.arrival_rates[i];
    const double freq = arrivals[i] / observed;
    const double se = std::sqrt(lambda * (1 - lambda) / observed);
    CHECK(std::abs(freq - lambda) <= 3.0 * se);
  }
}

#include "qstab/environment.hpp"

namespace qstab {

namespace {

class ServerAllocEnv final : public Environment {
 public:
  explicit ServerAllocEnv(ServerAllocConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    state_.queues.assign(cfg_.num_queues(), 0);
    state_.flags.assign(cfg_.num_queues(), 1);
  }

  State reset(RandomStream& rng) override {
    state_ = server_alloc_reset(cfg_, rng);
    return state_;
  }

  double step(Action a, RandomStream& rng) override {
    StepResult r = server_alloc_step(cfg_, state_, a, rng);
    state_ = std::move(r.next);
    return r.true_cost;
  }

  const State& state() const override { return state_; }
  void set_state(const State& s) override { state_ = s; }
  int num_actions() const override { return cfg_.num_queues(); }
  int obs_dim() const override { return 2 * cfg_.num_queues(); }

 private:
  ServerAllocConfig cfg_;
  State state_;
};

class NModelEnv final : public Environment {
 public:
  explicit NModelEnv(NModelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    state_.queues.assign(2, 0);
  }

  State reset(RandomStream& rng) override {
    state_ = nmodel_reset(cfg_, rng);
    return state_;
  }

  double step(Action a, RandomStream& rng) override {
    StepResult r = nmodel_step(cfg_, state_, a, rng);
    state_ = std::move(r.next);
    return r.true_cost;
  }

  const State& state() const override { return state_; }
  void set_state(const State& s) override { state_ = s; }
  int num_actions() const override { return 2; }
  int obs_dim() const override { return 2; }

 private:
  NModelConfig cfg_;
  State state_;
};

}  // namespace

std::unique_ptr<Environment> make_environment(const EnvConfig& cfg) {
  if (const auto* sa = std::get_if<ServerAllocConfig>(&cfg))
    return std::make_unique<ServerAllocEnv>(*sa);
  return std::make_unique<NModelEnv>(std::get<NModelConfig>(cfg));
}

}  // namespace qstab

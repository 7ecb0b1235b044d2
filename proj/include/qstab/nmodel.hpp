#pragma once

#include <cstdint>
#include <vector>

#include "qstab/rng.hpp"
#include "qstab/server_alloc.hpp"
#include "qstab/state.hpp"

namespace qstab {

// N-model network: two job classes, two servers. Server 1 only works buffer 0;
// server 2 (the agent) picks buffer 0 or 1. The continuous-time chain is
// uniformized: each discrete step is exactly one event drawn with probability
// proportional to its rate; events that cannot apply are self-loops.
struct NModelConfig {
  double lambda1 = 0.9;  // class-1 arrival rate
  double lambda2 = 0.8;  // class-2 arrival rate
  double mu1 = 1.0;      // server 1 on buffer 0
  double mu2 = 0.9;      // server 2 on buffer 0
  double mu3 = 0.8;      // server 2 on buffer 1
  std::vector<double> holding_costs = {3.0, 1.0};
  int init_max = 10;

  double uniformization_rate() const {
    return lambda1 + lambda2 + mu1 + mu2 + mu3;
  }
  void validate() const;  // throws ConfigError
};

enum class NModelEvent {
  arrival1,
  arrival2,
  service1,      // server 1 on buffer 0, unconditional on the action
  service2_b0,   // server 2 on buffer 0, effective iff action == 0
  service3_b1,   // server 2 on buffer 1, effective iff action == 1
};

NModelEvent nmodel_sample_event(const NModelConfig& cfg, RandomStream& rng);

// Applies one event; ineffective events leave the state unchanged.
State nmodel_apply_event(const State& state, Action action, NModelEvent ev);

State nmodel_reset(const NModelConfig& cfg, RandomStream& rng);

// true_cost is the holding-cost dot product with the next state's queues.
StepResult nmodel_step(const NModelConfig& cfg, const State& state,
                       Action action, RandomStream& rng);

}  // namespace qstab

#include "qstab/nmodel.hpp"

#include <string>

#include "qstab/errors.hpp"

namespace qstab {

void NModelConfig::validate() const {
  if (!(lambda1 > 0.0 && lambda2 > 0.0 && mu1 > 0.0 && mu2 > 0.0 && mu3 > 0.0))
    throw ConfigError("nmodel: all rates must be positive");
  if (holding_costs.size() != 2)
    throw ConfigError("nmodel: holding_costs must have 2 entries");
  if (init_max < 0) throw ConfigError("init_max must be non-negative");
}

NModelEvent nmodel_sample_event(const NModelConfig& cfg, RandomStream& rng) {
  const double u = rng.uniform() * cfg.uniformization_rate();
  double acc = cfg.lambda1;
  if (u < acc) return NModelEvent::arrival1;
  acc += cfg.lambda2;
  if (u < acc) return NModelEvent::arrival2;
  acc += cfg.mu1;
  if (u < acc) return NModelEvent::service1;
  acc += cfg.mu2;
  if (u < acc) return NModelEvent::service2_b0;
  return NModelEvent::service3_b1;
}

State nmodel_apply_event(const State& state, Action action, NModelEvent ev) {
  State next = state;
  switch (ev) {
    case NModelEvent::arrival1:
      next.queues[0] += 1;
      break;
    case NModelEvent::arrival2:
      next.queues[1] += 1;
      break;
    case NModelEvent::service1:
      if (next.queues[0] > 0) next.queues[0] -= 1;
      break;
    case NModelEvent::service2_b0:
      if (action.index == 0 && next.queues[0] > 0) next.queues[0] -= 1;
      break;
    case NModelEvent::service3_b1:
      if (action.index == 1 && next.queues[1] > 0) next.queues[1] -= 1;
      break;
  }
  return next;
}

State nmodel_reset(const NModelConfig& cfg, RandomStream& rng) {
  cfg.validate();
  State s;
  s.queues.resize(2);
  for (int i = 0; i < 2; ++i) s.queues[i] = rng.uniform_int(cfg.init_max + 1);
  return s;
}

StepResult nmodel_step(const NModelConfig& cfg, const State& state,
                       Action action, RandomStream& rng) {
  if (action.index < 0 || action.index > 1)
    throw ContractError("nmodel_step: action index " +
                        std::to_string(action.index) + " out of range");
  StepResult r;
  r.next = nmodel_apply_event(state, action, nmodel_sample_event(cfg, rng));
  r.true_cost = cfg.holding_costs[0] * r.next.queues[0] +
                cfg.holding_costs[1] * r.next.queues[1];
  return r;
}

}  // namespace qstab

#pragma once

#include <span>

#include "qstab/state.hpp"

namespace qstab {

// Serve argmax_i (flag_i if use_flags else 1) * p_i * Q_i, ties to the lowest
// index. Zero-length queues have zero weight, so a non-empty reachable queue
// is never passed over for an empty one.
Action maxweight_action(const State& state, std::span<const double> service_probs,
                        bool use_flags);

// Among non-empty queues, serve argmax_i cost_i * rate_i; lowest index when
// everything is empty.
Action cmu_action(const State& state, std::span<const double> holding_costs,
                  std::span<const double> service_rates);

// Longest / shortest non-empty queue; lowest index when everything is empty.
Action serve_longest_action(const State& state);
Action serve_shortest_action(const State& state);

// Queue-length guard around an RL policy: above `upper` a known-stable
// scheduler takes over until the maximum queue drops below `lower`
// (hysteresis band in between). Transitions taken in safe mode are off-policy
// and must not enter the learner's rollout buffer.
struct TrainingWheels {
  enum class Mode { rl, safe };
  Mode mode = Mode::rl;
  int upper = 100;
  int lower = 50;
};

// Updates the mode from the current maximum queue length; returns true when
// the step should be taken by the safe policy.
bool training_wheels_update(TrainingWheels& tw, const State& state);

}  // namespace qstab

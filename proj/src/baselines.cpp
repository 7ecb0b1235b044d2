#include "qstab/baselines.hpp"

namespace qstab {

Action maxweight_action(const State& state, std::span<const double> service_probs,
                        bool use_flags) {
  int best = 0;
  double best_w = -1.0;
  for (std::size_t i = 0; i < state.queues.size(); ++i) {
    const double flag = use_flags ? static_cast<double>(state.flags[i]) : 1.0;
    const double w = flag * service_probs[i] * state.queues[i];
    if (w > best_w) {
      best_w = w;
      best = static_cast<int>(i);
    }
  }
  return {best};
}

Action cmu_action(const State& state, std::span<const double> holding_costs,
                  std::span<const double> service_rates) {
  int best = -1;
  double best_w = 0.0;
  for (std::size_t i = 0; i < state.queues.size(); ++i) {
    if (state.queues[i] == 0) continue;
    const double w = holding_costs[i] * service_rates[i];
    if (best < 0 || w > best_w) {
      best_w = w;
      best = static_cast<int>(i);
    }
  }
  return {best < 0 ? 0 : best};
}

Action serve_longest_action(const State& state) {
  int best = 0;
  for (std::size_t i = 1; i < state.queues.size(); ++i)
    if (state.queues[i] > state.queues[best]) best = static_cast<int>(i);
  return {best};
}

Action serve_shortest_action(const State& state) {
  int best = -1;
  for (std::size_t i = 0; i < state.queues.size(); ++i) {
    if (state.queues[i] == 0) continue;
    if (best < 0 || state.queues[i] < state.queues[best])
      best = static_cast<int>(i);
  }
  return {best < 0 ? 0 : best};
}

bool training_wheels_update(TrainingWheels& tw, const State& state) {
  const int mx = state.max_queue();
  if (tw.mode == TrainingWheels::Mode::rl && mx > tw.upper)
    tw.mode = TrainingWheels::Mode::safe;
  else if (tw.mode == TrainingWheels::Mode::safe && mx < tw.lower)
    tw.mode = TrainingWheels::Mode::rl;
  return tw.mode == TrainingWheels::Mode::safe;
}

}  // namespace qstab

#pragma once

#include <cstdint>
#include <vector>

#include "qstab/rng.hpp"
#include "qstab/state.hpp"

namespace qstab {

// Single-server allocation network: N queues, Bernoulli arrivals, one service
// attempt per step on the selected queue, random per-step connectivity.
struct ServerAllocConfig {
  std::vector<double> arrival_rates;  // per-queue arrival probability per step
  std::vector<double> service_probs;  // success probability when served
  std::vector<double> connect_probs;  // probability the server can reach queue i
  int init_max = 10;                  // reset draws queue lengths from {0..init_max}

  int num_queues() const { return static_cast<int>(arrival_rates.size()); }
  void validate() const;  // throws ConfigError
};

struct StepResult {
  State next;
  double true_cost = 0.0;
};

// Queues uniform on {0..init_max}, flags Bernoulli(c_i).
State server_alloc_reset(const ServerAllocConfig& cfg, RandomStream& rng);
State server_alloc_reset(const ServerAllocConfig& cfg, std::uint64_t seed);

// One step. Connectivity is read from the observed state; at most one job
// departs system-wide; each queue then gains at most one arrival; next-state
// flags are redrawn. true_cost is the total queue length of the next state.
StepResult server_alloc_step(const ServerAllocConfig& cfg, const State& state,
                             Action action, RandomStream& rng);

// Necessary load condition: sum_i lambda_i/p_i < 1 - prod_i (1 - c_i) and
// lambda_i/p_i < c_i for every queue. Throws ConfigError when any p_i == 0.
bool stabilizability_check(const ServerAllocConfig& cfg);

}  // namespace qstab

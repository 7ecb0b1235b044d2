#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qstab/nmodel.hpp"
#include "qstab/parallel.hpp"
#include "qstab/server_alloc.hpp"
#include "qstab/state.hpp"

namespace qstab {

// Action distribution of a (possibly randomized) stationary policy.
using ProbPolicy = std::function<std::vector<double>(const State&)>;

ProbPolicy deterministic_policy(std::function<Action(const State&)> fn,
                                int num_actions);
ProbPolicy uniform_policy(int num_actions);

// Exact finite chain obtained by capping every queue at `cap` (arrivals that
// would overflow are absorbed at the cap) under a fixed policy. Queues with
// deterministic connectivity (c in {0,1}) contribute no flag dimension.
struct TruncatedChain {
  int cap = 0;
  std::vector<State> states;
  std::vector<std::vector<std::pair<int, double>>> rows_out;  // P by row
  par::InEdges rows_in;                                       // P^T by row
  std::vector<double> expected_true_cost;  // E[c(next) | state, policy]
};

// Throws SizeError when the enumerated space exceeds max_states.
TruncatedChain build_truncated_chain(const ServerAllocConfig& cfg,
                                     const ProbPolicy& policy, int cap,
                                     std::size_t max_states = 1000000);
TruncatedChain build_truncated_chain(const NModelConfig& cfg,
                                     const ProbPolicy& policy, int cap,
                                     std::size_t max_states = 1000000);

// Unique stationary distribution. Dense linear solve up to
// dense_state_limit states, power iteration (tolerance 1e-12, at most 1e6
// iterations) beyond. Throws MultiClassError when the chain has more than one
// closed communicating class.
std::vector<double> stationary_distribution(const TruncatedChain& chain,
                                            int dense_state_limit = 5000);

// Long-run average cost under the stationary distribution. shaped_p empty
// selects the true cost; otherwise the energy-shaped cost with exponent p.
double stationary_average_cost(const TruncatedChain& chain,
                               std::optional<double> shaped_p,
                               int dense_state_limit = 5000);

// Expected one-step shaped cost from state i (drift of the energy plus the
// expected true cost).
double expected_shaped_cost(const TruncatedChain& chain, int state_index,
                            double p);

}  // namespace qstab

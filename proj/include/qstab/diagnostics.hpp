#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qstab/state.hpp"

namespace qstab {

class RolloutBuffer;

struct IqmSummary {
  double iqm = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n_samples = 0;
  int n_bootstrap = 0;
};

// An action is destabilizing when it serves an empty queue while some other
// queue is non-empty. Computed from raw states only.
bool destabilizing_action(const State& state, Action action);

// Fraction of buffer slots whose action was destabilizing. ContractError on
// an empty buffer.
double destabilizing_fraction(const RolloutBuffer& buffer);

// Fraction of states with total queue length <= l1_radius.
double visitation_mass(std::span<const State> states, double l1_radius);
double visitation_mass(std::span<const double> total_queue_lengths,
                       double l1_radius);

// Occupancy counts over the first two queue coordinates, clamped to
// [0, max_coord] per axis; grid[x][y] = visits with (q0, q1) = (x, y).
std::vector<std::vector<long>> visitation_grid(std::span<const State> states,
                                               int max_coord);

// Interquartile mean with fractional-weight endpoints: sample i (sorted,
// occupying [i-1, i) in rank space) contributes weight
// |[i-1, i) ∩ [n/4, 3n/4)|, and the weighted mean uses total weight n/2.
double iqm(std::span<const double> samples);

// Percentile bootstrap (2.5 / 97.5) of the IQM statistic. Resample b draws
// its indices from a stream seeded by (seed, b), so results do not depend on
// thread count. Requires n >= 2.
IqmSummary bootstrap_ci(std::span<const double> samples, int n_bootstrap,
                        std::uint64_t seed);

// Mean advantage over destabilizing slots; empty marker when the buffer has
// none. Advantages are taken as given (already normalized upstream).
std::optional<double> destabilizing_advantage_mean(
    const RolloutBuffer& buffer, std::span<const double> advantages);

}  // namespace qstab

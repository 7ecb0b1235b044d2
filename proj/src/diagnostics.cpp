#include "qstab/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "qstab/arppo.hpp"
#include "qstab/errors.hpp"
#include "qstab/parallel.hpp"

namespace qstab {

bool destabilizing_action(const State& state, Action action) {
  if (state.queues[action.index] > 0) return false;
  for (std::size_t i = 0; i < state.queues.size(); ++i)
    if (static_cast<int>(i) != action.index && state.queues[i] > 0) return true;
  return false;
}

double destabilizing_fraction(const RolloutBuffer& buffer) {
  if (buffer.size() == 0)
    throw ContractError("destabilizing_fraction: empty buffer");
  int count = 0;
  for (int i = 0; i < buffer.size(); ++i)
    if (buffer[i].destabilizing) ++count;
  return static_cast<double>(count) / buffer.size();
}

double visitation_mass(std::span<const State> states, double l1_radius) {
  if (states.empty()) throw ContractError("visitation_mass: empty sequence");
  std::size_t inside = 0;
  for (const State& s : states)
    if (s.total_queue() <= l1_radius) ++inside;
  return static_cast<double>(inside) / states.size();
}

double visitation_mass(std::span<const double> total_queue_lengths,
                       double l1_radius) {
  if (total_queue_lengths.empty())
    throw ContractError("visitation_mass: empty sequence");
  std::size_t inside = 0;
  for (double q : total_queue_lengths)
    if (q <= l1_radius) ++inside;
  return static_cast<double>(inside) / total_queue_lengths.size();
}

std::vector<std::vector<long>> visitation_grid(std::span<const State> states,
                                               int max_coord) {
  std::vector<std::vector<long>> grid(
      max_coord + 1, std::vector<long>(max_coord + 1, 0));
  for (const State& s : states) {
    const int x = std::min(s.queues.size() > 0 ? s.queues[0] : 0, max_coord);
    const int y = std::min(s.queues.size() > 1 ? s.queues[1] : 0, max_coord);
    grid[x][y] += 1;
  }
  return grid;
}

double iqm(std::span<const double> samples) {
  const int n = static_cast<int>(samples.size());
  if (n == 0) throw ContractError("iqm: empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = 0.25 * n;
  const double hi = 0.75 * n;
  double wsum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w =
        std::max(0.0, std::min<double>(i + 1, hi) - std::max<double>(i, lo));
    wsum += w * sorted[i];
  }
  return wsum / (0.5 * n);
}

IqmSummary bootstrap_ci(std::span<const double> samples, int n_bootstrap,
                        std::uint64_t seed) {
  if (samples.size() < 2)
    throw ContractError("bootstrap_ci: need at least 2 samples");
  if (n_bootstrap < 1)
    throw ContractError("bootstrap_ci: need at least 1 resample");

  std::vector<double> stats(n_bootstrap);
  par::bootstrap_iqm_omp(samples, seed, stats);
  std::sort(stats.begin(), stats.end());

  auto quantile = [&](double q) {
    const double pos = q * (n_bootstrap - 1);
    const int i = static_cast<int>(pos);
    if (i + 1 >= n_bootstrap) return stats[n_bootstrap - 1];
    const double frac = pos - i;
    return stats[i] * (1.0 - frac) + stats[i + 1] * frac;
  };

  IqmSummary s;
  s.iqm = iqm(samples);
  s.ci_low = std::min(quantile(0.025), s.iqm);
  s.ci_high = std::max(quantile(0.975), s.iqm);
  s.n_samples = static_cast<int>(samples.size());
  s.n_bootstrap = n_bootstrap;
  return s;
}

std::optional<double> destabilizing_advantage_mean(
    const RolloutBuffer& buffer, std::span<const double> advantages) {
  if (static_cast<int>(advantages.size()) != buffer.size())
    throw ContractError("destabilizing_advantage_mean: length mismatch");
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < buffer.size(); ++i) {
    if (buffer[i].destabilizing) {
      sum += advantages[i];
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

}  // namespace qstab

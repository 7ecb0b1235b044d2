// Timing comparison of the serial reference kernels against their OpenMP
// counterparts: transition matvec (power-iteration inner loop) and bootstrap
// IQM resampling. Also times a full stationary solve on a truncated chain.

#include <chrono>
#include <cstdio>
#include <vector>

#include "qstab/baselines.hpp"
#include "qstab/oracle.hpp"
#include "qstab/parallel.hpp"
#include "qstab/presets.hpp"
#include "qstab/rng.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <typename F>
double time_best_of(int reps, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    best = std::min(best, ms_since(t0));
  }
  return best;
}

}  // namespace

int main() {
  qstab::RandomStream rng(42);

  // synthetic sparse chain: n states, k in-edges each
  const int n = 200000, k = 24;
  qstab::par::InEdges in(n);
  for (int j = 0; j < n; ++j) {
    in[j].reserve(k);
    double left = 1.0;
    for (int e = 0; e < k; ++e) {
      const double p = e + 1 == k ? left : left * rng.uniform() * 0.5;
      in[j].emplace_back(rng.uniform_int(n), p);
      left -= p;
    }
  }
  std::vector<double> x(n), y(n);
  for (double& v : x) v = rng.uniform();

  const double mv_serial = time_best_of(
      5, [&] { qstab::par::matvec_in_serial(in, x, y); });
  const double mv_omp = time_best_of(
      5, [&] { qstab::par::matvec_in_omp(in, x, y); });
  std::printf("matvec       n=%d nnz=%d   serial %8.2f ms   omp %8.2f ms   speedup %.2fx\n",
              n, n * k, mv_serial, mv_omp, mv_serial / mv_omp);

  // bootstrap resampling
  std::vector<double> samples(5000);
  for (double& v : samples) v = rng.gaussian();
  std::vector<double> stats(4000);
  const double bs_serial = time_best_of(
      3, [&] { qstab::par::bootstrap_iqm_serial(samples, 7, stats); });
  const double bs_omp = time_best_of(
      3, [&] { qstab::par::bootstrap_iqm_omp(samples, 7, stats); });
  std::printf("bootstrap    n=%zu B=%zu   serial %8.2f ms   omp %8.2f ms   speedup %.2fx\n",
              samples.size(), stats.size(), bs_serial, bs_omp,
              bs_serial / bs_omp);

  // end-to-end: stationary distribution of a truncated medium-load chain via
  // power iteration (cap chosen so the dense path is skipped)
  const auto env = qstab::load_preset("sa-medium");
  const auto& sa = std::get<qstab::ServerAllocConfig>(env);
  const qstab::TruncatedChain chain = qstab::build_truncated_chain(
      sa,
      qstab::deterministic_policy(
          [&](const qstab::State& s) {
            return qstab::maxweight_action(s, sa.service_probs, true);
          },
          sa.num_queues()),
      120);
  const auto t0 = Clock::now();
  const std::vector<double> pi =
      qstab::stationary_distribution(chain, /*dense_state_limit=*/1);
  std::printf("power-iter   %zu states            %8.2f ms (mass at origin %.4f)\n",
              chain.states.size(), ms_since(t0), pi[0]);
  return 0;
}

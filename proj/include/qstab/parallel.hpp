#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace qstab::par {

// Number of worker threads to use: `requested` when positive, otherwise the
// hardware count.
int resolve_workers(int requested);

using InEdges = std::vector<std::vector<std::pair<int, double>>>;

// y[j] = sum over in-edges (i, p) of x[i] * p, i.e. y = P^T x with P stored
// by incoming edges. Each output entry is produced by exactly one thread with
// a fixed accumulation order, so the OpenMP kernel is bit-identical to the
// serial one.
void matvec_in_serial(const InEdges& in, std::span<const double> x,
                      std::span<double> y);
void matvec_in_omp(const InEdges& in, std::span<const double> x,
                   std::span<double> y);

// out[b] = IQM of the b-th bootstrap resample of `samples`; resample b is
// seeded by (seed, b) so the result is independent of thread count.
void bootstrap_iqm_serial(std::span<const double> samples, std::uint64_t seed,
                          std::span<double> out);
void bootstrap_iqm_omp(std::span<const double> samples, std::uint64_t seed,
                       std::span<double> out);

}  // namespace qstab::par

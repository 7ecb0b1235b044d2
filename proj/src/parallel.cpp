#include "qstab/parallel.hpp"

#include <omp.h>

#include <thread>

#include "qstab/diagnostics.hpp"
#include "qstab/rng.hpp"

namespace qstab::par {

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void matvec_in_serial(const InEdges& in, std::span<const double> x,
                      std::span<double> y) {
  const int n = static_cast<int>(in.size());
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (const auto& [i, p] : in[j]) acc += x[i] * p;
    y[j] = acc;
  }
}

void matvec_in_omp(const InEdges& in, std::span<const double> x,
                   std::span<double> y) {
  const int n = static_cast<int>(in.size());
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (const auto& [i, p] : in[j]) acc += x[i] * p;
    y[j] = acc;
  }
}

namespace {
double resample_iqm(std::span<const double> samples, std::uint64_t seed,
                    int b, std::vector<double>& scratch) {
  RandomStream rng(mix_seed(seed, static_cast<std::uint64_t>(b)));
  const int n = static_cast<int>(samples.size());
  scratch.resize(n);
  for (int i = 0; i < n; ++i) scratch[i] = samples[rng.uniform_int(n)];
  return iqm(scratch);
}
}  // namespace

void bootstrap_iqm_serial(std::span<const double> samples, std::uint64_t seed,
                          std::span<double> out) {
  std::vector<double> scratch;
  for (int b = 0; b < static_cast<int>(out.size()); ++b)
    out[b] = resample_iqm(samples, seed, b, scratch);
}

void bootstrap_iqm_omp(std::span<const double> samples, std::uint64_t seed,
                       std::span<double> out) {
  const int nb = static_cast<int>(out.size());
#pragma omp parallel
  {
    std::vector<double> scratch;
#pragma omp for schedule(static)
    for (int b = 0; b < nb; ++b)
      out[b] = resample_iqm(samples, seed, b, scratch);
  }
}

}  // namespace qstab::par

#pragma once

#include <cstdint>
#include <random>

namespace qstab {

// splitmix64 finalizer; used to derive independent stream seeds from a base
// seed without correlated low bits.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

// Deterministic random stream. mt19937_64's output sequence is fully
// specified by the standard; doubles are produced with an explicit 53-bit
// conversion (never std::uniform_real_distribution, whose algorithm is
// implementation-defined), so identical seeds give identical streams on any
// conforming toolchain.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // uniform in {0, ..., n-1}; n >= 1
  int uniform_int(int n) {
    int k = static_cast<int>(uniform() * n);
    return k < n ? k : n - 1;
  }

  // standard normal, Box-Muller; second value of each pair is cached
  double gaussian();

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qstab

#include "qstab/server_alloc.hpp"

#include <string>

#include "qstab/errors.hpp"

namespace qstab {

namespace {
void check_rate_vector(const std::vector<double>& v, std::size_t n,
                       const char* name) {
  if (v.size() != n)
    throw ConfigError(std::string(name) + ": expected " + std::to_string(n) +
                      " entries, got " + std::to_string(v.size()));
  for (double x : v)
    if (!(x >= 0.0 && x <= 1.0))
      throw ConfigError(std::string(name) + ": rate out of [0,1]");
}
}  // namespace

void ServerAllocConfig::validate() const {
  if (arrival_rates.empty()) throw ConfigError("server-alloc: no queues");
  const std::size_t n = arrival_rates.size();
  check_rate_vector(arrival_rates, n, "arrival_rates");
  check_rate_vector(service_probs, n, "service_probs");
  check_rate_vector(connect_probs, n, "connect_probs");
  if (init_max < 0) throw ConfigError("init_max must be non-negative");
}

State server_alloc_reset(const ServerAllocConfig& cfg, RandomStream& rng) {
  cfg.validate();
  const int n = cfg.num_queues();
  State s;
  s.queues.resize(n);
  s.flags.resize(n);
  for (int i = 0; i < n; ++i) s.queues[i] = rng.uniform_int(cfg.init_max + 1);
  for (int i = 0; i < n; ++i)
    s.flags[i] = rng.bernoulli(cfg.connect_probs[i]) ? 1 : 0;
  return s;
}

State server_alloc_reset(const ServerAllocConfig& cfg, std::uint64_t seed) {
  RandomStream rng(seed);
  return server_alloc_reset(cfg, rng);
}

StepResult server_alloc_step(const ServerAllocConfig& cfg, const State& state,
                             Action action, RandomStream& rng) {
  const int n = cfg.num_queues();
  const int a = action.index;
  if (a < 0 || a >= n)
    throw ContractError("server_alloc_step: action index " +
                        std::to_string(a) + " out of range");

  StepResult r;
  r.next.queues = state.queues;
  r.next.flags.resize(n);

  // departure first (uses the observed flags), then arrivals, then new flags
  if (state.flags[a] == 1 && state.queues[a] > 0 &&
      rng.bernoulli(cfg.service_probs[a])) {
    r.next.queues[a] -= 1;
  }
  for (int i = 0; i < n; ++i)
    if (rng.bernoulli(cfg.arrival_rates[i])) r.next.queues[i] += 1;
  for (int i = 0; i < n; ++i)
    r.next.flags[i] = rng.bernoulli(cfg.connect_probs[i]) ? 1 : 0;

  r.true_cost = static_cast<double>(r.next.total_queue());
  return r;
}

bool stabilizability_check(const ServerAllocConfig& cfg) {
  cfg.validate();
  double load = 0.0;
  double all_disconnected = 1.0;
  for (int i = 0; i < cfg.num_queues(); ++i) {
    if (cfg.service_probs[i] == 0.0)
      throw ConfigError("stabilizability_check: service_probs[" +
                        std::to_string(i) + "] is zero");
    const double rho_i = cfg.arrival_rates[i] / cfg.service_probs[i];
    if (!(rho_i < cfg.connect_probs[i])) return false;
    load += rho_i;
    all_disconnected *= 1.0 - cfg.connect_probs[i];
  }
  return load < 1.0 - all_disconnected;
}

}  // namespace qstab

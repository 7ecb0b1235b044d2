#pragma once

#include <memory>

#include "qstab/presets.hpp"
#include "qstab/rng.hpp"
#include "qstab/state.hpp"

namespace qstab {

// Runtime wrapper holding a config plus the current state. Instances are
// single-writer; run one per trial with its own random stream.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual State reset(RandomStream& rng) = 0;
  // Advances the internal state; returns the true optimality cost.
  virtual double step(Action a, RandomStream& rng) = 0;
  virtual const State& state() const = 0;
  virtual void set_state(const State& s) = 0;
  virtual int num_actions() const = 0;
  virtual int obs_dim() const = 0;
};

std::unique_ptr<Environment> make_environment(const EnvConfig& cfg);

}  // namespace qstab

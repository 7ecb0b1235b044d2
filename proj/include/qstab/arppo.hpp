#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qstab/baselines.hpp"
#include "qstab/environment.hpp"
#include "qstab/mlp.hpp"
#include "qstab/shaping.hpp"
#include "qstab/transforms.hpp"

namespace qstab {

struct PpoHyper {
  int rollout_len = 200;
  double lr = 2.5e-4;
  double clip = 0.2;
  double gae_lambda = 0.95;
  int epochs = 4;
  int minibatches = 4;
  double vf_coef = 0.5;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.9;

  // How the average-cost estimate tracks the data: a slow EMA over buffer
  // means (default), or recentering on every buffer. The choice changes the
  // learner substantially: buffer_mean keeps advantages centered at all
  // times, which makes the plain-cost learner markedly stronger.
  enum class EtaMode { buffer_mean, ema };
  EtaMode eta_mode = EtaMode::ema;
  double eta_ema_alpha = 0.01;
};

struct RolloutSlot {
  State raw_state;
  std::vector<double> obs;       // transformed state fed to the nets
  int action = 0;
  double logprob = 0.0;          // behavior log-probability
  double shaped_cost = 0.0;
  double true_cost = 0.0;
  State raw_next;
  std::vector<double> next_obs;
  bool destabilizing = false;
};

// Fixed-capacity on-policy transition store; filled exactly to capacity
// between consecutive updates.
class RolloutBuffer {
 public:
  explicit RolloutBuffer(int capacity) : capacity_(capacity) {
    slots_.reserve(capacity);
  }

  void push(RolloutSlot slot);
  void clear() { slots_.clear(); }
  bool full() const { return static_cast<int>(slots_.size()) == capacity_; }
  int size() const { return static_cast<int>(slots_.size()); }
  int capacity() const { return capacity_; }
  const RolloutSlot& operator[](int i) const { return slots_[i]; }

 private:
  int capacity_;
  std::vector<RolloutSlot> slots_;
};

// Running estimate of the long-run shaped cost (the baseline subtracted in
// differential values).
struct AvgCostEstimate {
  double eta = 0.0;
  bool initialized = false;
};

void update_eta(const RolloutBuffer& buffer, AvgCostEstimate& est,
                PpoHyper::EtaMode mode = PpoHyper::EtaMode::buffer_mean,
                double ema_alpha = 0.1);

// Raw generalized advantages in reward convention (costs negated):
// delta_t = -(l_t - eta) + V(next_obs_t) - V(obs_t), A_t = sum_k lambda^k
// delta_{t+k}, undiscounted, truncated at the buffer end.
std::vector<double> compute_gae(const RolloutBuffer& buffer,
                                const LayerStack& critic, double eta,
                                double gae_lambda);

struct AdvantageResult {
  std::vector<double> advantages;     // std-normalized (no mean subtraction)
  std::vector<double> value_targets;  // raw A_t + V(obs_t)
};

// Normalization divides by the buffer standard deviation; a zero-variance
// buffer is left unscaled.
AdvantageResult estimate_advantages(const RolloutBuffer& buffer,
                                    const LayerStack& critic, double eta,
                                    double gae_lambda);

// Per-sample clipped objective min(ratio*adv, clip(ratio, 1 +- eps)*adv).
double clipped_objective(double ratio, double advantage, double clip_eps);

struct UpdateStats {
  double policy_loss = 0.0;   // last minibatch
  double value_loss = 0.0;
  double entropy = 0.0;
  double total_loss = 0.0;
};

// One full update: `epochs` passes of shuffled minibatches; clipped surrogate
// + MSE value loss + entropy bonus, joint global-norm gradient clipping,
// Adam. Throws TrainingError on non-finite losses or gradients.
UpdateStats ppo_update(LayerStack& policy, LayerStack& critic,
                       const RolloutBuffer& buffer,
                       std::span<const double> advantages,
                       std::span<const double> value_targets,
                       const PpoHyper& hyper, AdamState& policy_adam,
                       AdamState& critic_adam, RandomStream& rng);

// Samples an action from the policy over the transformed state (or takes
// `forced`), steps the environment, and assembles the slot. Shaped and true
// costs are functions of the raw states only.
RolloutSlot step_once(Environment& env, const LayerStack& policy,
                      const ShapingSpec& spec, TransformKind kind,
                      RandomStream& env_rng, RandomStream& agent_rng,
                      std::optional<Action> forced = std::nullopt);

// Fills the buffer to capacity from the environment's current state; the
// environment is not reset and keeps its final state for the next rollout.
void collect_rollout(Environment& env, const LayerStack& policy,
                     const ShapingSpec& spec, TransformKind kind,
                     RolloutBuffer& buffer, RandomStream& env_rng,
                     RandomStream& agent_rng);

struct LearnerConfig {
  ShapingSpec shaping;
  TransformKind transform = TransformKind::symloge;
  PpoHyper ppo;
  bool training_wheels = false;
  TrainingWheels tw;  // thresholds; runtime mode is per-trial
};

struct StepRecord {
  long step = 0;  // 1-based interaction step
  double true_cost = 0.0;
  double shaped_cost = 0.0;
  int action = 0;
  bool destabilizing = false;
  bool in_buffer = true;          // false for safe-mode steps
  const State* next_state = nullptr;  // valid only during the callback
};
using StepSink = std::function<void(const StepRecord&)>;

struct TrainStats {
  long steps = 0;
  long updates = 0;
  long buffer_pushes = 0;
  long safe_steps = 0;
};

// The single never-reset interaction loop: reset once, then `steps` steps with
// a policy update every time the buffer fills. `safe_policy` is required when
// training wheels are enabled; safe-mode transitions bypass the buffer. Final
// network parameters are copied out when the pointers are non-null.
TrainStats train(Environment& env, const LearnerConfig& cfg, long steps,
                 std::uint64_t seed, const StepSink& sink = {},
                 std::function<Action(const State&)> safe_policy = {},
                 LayerStack* final_policy = nullptr,
                 LayerStack* final_critic = nullptr);

}  // namespace qstab

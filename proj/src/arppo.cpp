#include "qstab/arppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qstab/diagnostics.hpp"
#include "qstab/errors.hpp"

namespace qstab {

void RolloutBuffer::push(RolloutSlot slot) {
  if (full()) throw ContractError("RolloutBuffer: push beyond capacity");
  slots_.push_back(std::move(slot));
}

void update_eta(const RolloutBuffer& buffer, AvgCostEstimate& est,
                PpoHyper::EtaMode mode, double ema_alpha) {
  if (!buffer.full())
    throw ContractError("update_eta: buffer not full");
  double mean = 0.0;
  for (int i = 0; i < buffer.size(); ++i) mean += buffer[i].shaped_cost;
  mean /= buffer.size();
  if (mode == PpoHyper::EtaMode::buffer_mean || !est.initialized)
    est.eta = mean;
  else
    est.eta = (1.0 - ema_alpha) * est.eta + ema_alpha * mean;
  est.initialized = true;
}

namespace {
Eigen::Map<const Eigen::VectorXd> as_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}
}  // namespace

std::vector<double> compute_gae(const RolloutBuffer& buffer,
                                const LayerStack& critic, double eta,
                                double gae_lambda) {
  const int n = buffer.size();
  if (n == 0) throw ContractError("compute_gae: empty buffer");
  std::vector<double> delta(n);
  for (int t = 0; t < n; ++t) {
    const double v = mlp_forward(critic, as_vec(buffer[t].obs))(0);
    const double v_next = mlp_forward(critic, as_vec(buffer[t].next_obs))(0);
    delta[t] = -(buffer[t].shaped_cost - eta) + v_next - v;
  }
  std::vector<double> adv(n);
  double acc = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    acc = delta[t] + gae_lambda * acc;
    adv[t] = acc;
  }
  return adv;
}

AdvantageResult estimate_advantages(const RolloutBuffer& buffer,
                                    const LayerStack& critic, double eta,
                                    double gae_lambda) {
  AdvantageResult r;
  r.advantages = compute_gae(buffer, critic, eta, gae_lambda);
  const int n = buffer.size();
  r.value_targets.resize(n);
  for (int t = 0; t < n; ++t)
    r.value_targets[t] =
        r.advantages[t] + mlp_forward(critic, as_vec(buffer[t].obs))(0);

  double sq = 0.0, mean = 0.0;
  for (double a : r.advantages) mean += a;
  mean /= n;
  for (double a : r.advantages) sq += (a - mean) * (a - mean);
  const double sd = std::sqrt(sq / n);
  if (sd > 0.0)
    for (double& a : r.advantages) a /= sd;
  return r;
}

double clipped_objective(double ratio, double advantage, double clip_eps) {
  const double clipped =
      std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantage;
  return std::min(ratio * advantage, clipped);
}

UpdateStats ppo_update(LayerStack& policy, LayerStack& critic,
                       const RolloutBuffer& buffer,
                       std::span<const double> advantages,
                       std::span<const double> value_targets,
                       const PpoHyper& hyper, AdamState& policy_adam,
                       AdamState& critic_adam, RandomStream& rng) {
  const int n = buffer.size();
  if (static_cast<int>(advantages.size()) != n ||
      static_cast<int>(value_targets.size()) != n)
    throw ContractError("ppo_update: advantage/target length mismatch");

  LayerStack pgrad = LayerStack::zeros_like(policy);
  LayerStack cgrad = LayerStack::zeros_like(critic);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  UpdateStats stats;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    // Fisher-Yates with our stream; std::shuffle's draws are unspecified
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[rng.uniform_int(i + 1)]);

    for (int mb = 0; mb < hyper.minibatches; ++mb) {
      const int lo = static_cast<int>(static_cast<long>(mb) * n / hyper.minibatches);
      const int hi =
          static_cast<int>(static_cast<long>(mb + 1) * n / hyper.minibatches);
      const int m = hi - lo;
      if (m == 0) continue;

      pgrad.set_zero();
      cgrad.set_zero();
      double pg_loss = 0.0, v_loss = 0.0, ent = 0.0;

      for (int k = lo; k < hi; ++k) {
        const RolloutSlot& slot = buffer[order[k]];
        const double adv = advantages[order[k]];

        ForwardCache pc;
        const Eigen::VectorXd logits =
            mlp_forward(policy, as_vec(slot.obs), pc);
        const Eigen::VectorXd lsm = log_softmax(logits);
        const double new_logp = lsm(slot.action);
        const double ratio = std::exp(new_logp - slot.logprob);
        const double surr1 = ratio * adv;
        const double surr2 =
            std::clamp(ratio, 1.0 - hyper.clip, 1.0 + hyper.clip) * adv;
        pg_loss += -std::min(surr1, surr2);

        // d(-min(surr1, surr2)) / d new_logp; the clipped branch is flat
        // outside the trust region
        double dobj_dlogp = 0.0;
        if (surr1 <= surr2) {
          dobj_dlogp = ratio * adv;
        } else if (ratio > 1.0 - hyper.clip && ratio < 1.0 + hyper.clip) {
          dobj_dlogp = ratio * adv;
        }
        const double h = categorical_entropy(logits);
        ent += h;

        Eigen::VectorXd logit_grad =
            -dobj_dlogp * logprob_grad(logits, slot.action) -
            hyper.entropy_coef * entropy_grad(logits);
        mlp_backward(policy, pc, logit_grad, pgrad);

        ForwardCache cc;
        const double v = mlp_forward(critic, as_vec(slot.obs), cc)(0);
        const double err = v - value_targets[order[k]];
        v_loss += err * err;
        Eigen::VectorXd vgrad(1);
        vgrad(0) = hyper.vf_coef * 2.0 * err;
        mlp_backward(critic, cc, vgrad, cgrad);
      }

      const double inv_m = 1.0 / m;
      scale_grads({&pgrad, &cgrad}, inv_m);
      pg_loss *= inv_m;
      v_loss *= inv_m;
      ent *= inv_m;
      const double total =
          pg_loss + hyper.vf_coef * v_loss - hyper.entropy_coef * ent;
      if (!std::isfinite(total))
        throw TrainingError("ppo_update: non-finite loss");

      const double gnorm = global_grad_norm({&pgrad, &cgrad});
      if (!std::isfinite(gnorm))
        throw TrainingError("ppo_update: non-finite gradient norm");
      if (gnorm > hyper.max_grad_norm && gnorm > 0.0)
        scale_grads({&pgrad, &cgrad}, hyper.max_grad_norm / gnorm);

      adam_step(policy, pgrad, policy_adam);
      adam_step(critic, cgrad, critic_adam);

      stats.policy_loss = pg_loss;
      stats.value_loss = v_loss;
      stats.entropy = ent;
      stats.total_loss = total;
    }
  }
  return stats;
}

RolloutSlot step_once(Environment& env, const LayerStack& policy,
                      const ShapingSpec& spec, TransformKind kind,
                      RandomStream& env_rng, RandomStream& agent_rng,
                      std::optional<Action> forced) {
  RolloutSlot slot;
  slot.raw_state = env.state();
  transform_state(kind, slot.raw_state, slot.obs);

  if (forced) {
    slot.action = forced->index;
    slot.logprob = 0.0;
  } else {
    const Eigen::VectorXd logits = mlp_forward(policy, as_vec(slot.obs));
    const SampleResult s = categorical_sample(logits, agent_rng);
    slot.action = s.action;
    slot.logprob = s.logprob;
  }

  slot.true_cost = env.step({slot.action}, env_rng);
  slot.raw_next = env.state();
  transform_state(kind, slot.raw_next, slot.next_obs);
  slot.shaped_cost =
      shaped_cost(slot.raw_state, slot.raw_next, slot.true_cost, spec);
  slot.destabilizing = destabilizing_action(slot.raw_state, {slot.action});
  return slot;
}

void collect_rollout(Environment& env, const LayerStack& policy,
                     const ShapingSpec& spec, TransformKind kind,
                     RolloutBuffer& buffer, RandomStream& env_rng,
                     RandomStream& agent_rng) {
  if (buffer.size() != 0)
    throw ContractError("collect_rollout: buffer must start empty");
  while (!buffer.full())
    buffer.push(step_once(env, policy, spec, kind, env_rng, agent_rng));
}

TrainStats train(Environment& env, const LearnerConfig& cfg, long steps,
                 std::uint64_t seed, const StepSink& sink,
                 std::function<Action(const State&)> safe_policy,
                 LayerStack* final_policy, LayerStack* final_critic) {
  if (cfg.training_wheels && !safe_policy)
    throw ContractError("train: training wheels require a safe policy");

  RandomStream env_rng(mix_seed(seed, 0));
  RandomStream agent_rng(mix_seed(seed, 1));

  LayerStack policy = make_mlp(env.obs_dim(), {64, 64}, env.num_actions(),
                               std::sqrt(2.0), 0.01, agent_rng);
  LayerStack critic =
      make_mlp(env.obs_dim(), {64, 64}, 1, std::sqrt(2.0), 1.0, agent_rng);
  AdamState policy_adam = AdamState::init(policy, cfg.ppo.lr,
                                          cfg.ppo.adam_beta1, cfg.ppo.adam_beta2);
  AdamState critic_adam = AdamState::init(critic, cfg.ppo.lr,
                                          cfg.ppo.adam_beta1, cfg.ppo.adam_beta2);

  RolloutBuffer buffer(cfg.ppo.rollout_len);
  AvgCostEstimate eta;
  TrainingWheels tw = cfg.tw;

  env.reset(env_rng);
  TrainStats stats;
  for (long t = 1; t <= steps; ++t) {
    bool safe = false;
    std::optional<Action> forced;
    if (cfg.training_wheels) {
      safe = training_wheels_update(tw, env.state());
      if (safe) forced = safe_policy(env.state());
    }

    RolloutSlot slot =
        step_once(env, policy, cfg.shaping, cfg.transform, env_rng, agent_rng,
                  forced);

    StepRecord rec;
    rec.step = t;
    rec.true_cost = slot.true_cost;
    rec.shaped_cost = slot.shaped_cost;
    rec.action = slot.action;
    rec.destabilizing = slot.destabilizing;
    rec.in_buffer = !safe;
    rec.next_state = &slot.raw_next;

    if (sink) sink(rec);  // before the slot is moved; next_state points into it
    if (safe) {
      ++stats.safe_steps;
    } else {
      buffer.push(std::move(slot));
      ++stats.buffer_pushes;
    }

    if (buffer.full()) {
      update_eta(buffer, eta, cfg.ppo.eta_mode, cfg.ppo.eta_ema_alpha);
      AdvantageResult adv = estimate_advantages(buffer, critic, eta.eta,
                                                cfg.ppo.gae_lambda);
      ppo_update(policy, critic, buffer, adv.advantages, adv.value_targets,
                 cfg.ppo, policy_adam, critic_adam, agent_rng);
      buffer.clear();
      ++stats.updates;
    }
    ++stats.steps;
  }
  if (final_policy) *final_policy = policy;
  if (final_critic) *final_critic = critic;
  return stats;
}

}  // namespace qstab

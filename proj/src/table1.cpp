#include "qstab/table1.hpp"

#include <cmath>
#include <fstream>

#include "qstab/arppo.hpp"
#include "qstab/errors.hpp"
#include "qstab/runner.hpp"

namespace qstab {

std::vector<AdvantageProbeRow> advantage_probe(const ServerAllocConfig& env_cfg,
                                               int trials, int buffer_len,
                                               std::uint64_t base_seed,
                                               int n_bootstrap) {
  if (trials < 2) throw ConfigError("advantage_probe: need at least 2 trials");

  const ShapingSpec settings[3] = {
      {1.0, CostVariant::identity, false},  // true cost only
      {1.0, CostVariant::identity, true},   // + linear energy drift
      {2.0, CostVariant::identity, true},   // + quadratic energy drift
  };
  const char* names[3] = {"true", "l1_shaped", "l2_shaped"};

  std::vector<AdvantageProbeRow> rows(3);
  PpoHyper hyper;

  for (int s = 0; s < 3; ++s) {
    std::vector<double> per_trial_means;
    int with_destab = 0;

    for (int k = 0; k < trials; ++k) {
      const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k);
      auto env = make_environment(EnvConfig(env_cfg));
      RandomStream env_rng(mix_seed(seed, 0));
      RandomStream agent_rng(mix_seed(seed, 1));

      // untrained agent: uniform behavior policy, freshly initialized critic
      const LayerStack policy =
          make_zero_mlp(env->obs_dim(), {64, 64}, env->num_actions());
      const LayerStack critic = make_mlp(env->obs_dim(), {64, 64}, 1,
                                         std::sqrt(2.0), 1.0, agent_rng);

      env->reset(env_rng);
      RolloutBuffer buffer(buffer_len);
      collect_rollout(*env, policy, settings[s], TransformKind::identity,
                      buffer, env_rng, agent_rng);

      AvgCostEstimate eta;
      update_eta(buffer, eta);
      AdvantageResult adv =
          estimate_advantages(buffer, critic, eta.eta, hyper.gae_lambda);
      // reward convention -> cost convention: destabilizing actions should
      // come out positive
      for (double& a : adv.advantages) a = -a;

      if (const auto mean = destabilizing_advantage_mean(buffer, adv.advantages)) {
        per_trial_means.push_back(*mean);
        ++with_destab;
      }
    }

    AdvantageProbeRow row;
    row.setting = names[s];
    row.trials_with_destab = with_destab;
    if (per_trial_means.size() >= 2) {
      row.stats = bootstrap_ci(per_trial_means, n_bootstrap,
                               mix_seed(base_seed, 100 + s));
    } else if (per_trial_means.size() == 1) {
      row.stats.iqm = row.stats.ci_low = row.stats.ci_high = per_trial_means[0];
      row.stats.n_samples = 1;
    }
    rows[s] = std::move(row);
  }
  return rows;
}

void write_advantage_probe_csv(const std::vector<AdvantageProbeRow>& rows,
                               const std::filesystem::path& out_file) {
  std::ofstream f(out_file);
  if (!f) throw ConfigError("cannot write " + out_file.string());
  f << "setting,iqm,ci_low,ci_high,n_trials,trials_with_destab\n";
  for (const AdvantageProbeRow& r : rows)
    f << r.setting << ',' << csv_num(r.stats.iqm) << ','
      << csv_num(r.stats.ci_low) << ',' << csv_num(r.stats.ci_high) << ','
      << r.stats.n_samples << ',' << r.trials_with_destab << '\n';
}

}  // namespace qstab

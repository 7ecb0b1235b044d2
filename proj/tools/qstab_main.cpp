#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <sstream>

#include "qstab/aggregate.hpp"
#include "qstab/baselines.hpp"
#include "qstab/config.hpp"
#include "qstab/errors.hpp"
#include "qstab/oracle.hpp"
#include "qstab/runner.hpp"
#include "qstab/table1.hpp"

namespace {

int report_trial_failures(const qstab::RunResult& result) {
  int failed = 0;
  for (const auto& t : result.trials) {
    if (!t.ok) {
      std::cerr << "trial " << t.trial << " failed: " << t.error << "\n";
      ++failed;
    }
  }
  return failed;
}

int cmd_run(const std::string& config_path, long seed_override,
            const std::string& out_override, bool raw, int workers) {
  std::vector<std::string> warnings;
  qstab::ExperimentConfig cfg =
      qstab::load_config_file(config_path, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  if (seed_override >= 0)
    cfg.base_seed = static_cast<std::uint64_t>(seed_override);
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (raw) cfg.raw = true;
  if (workers > 0) cfg.workers = workers;

  const qstab::RunResult result = qstab::run_experiment(cfg);
  const int failed = report_trial_failures(result);
  std::cout << "wrote " << (cfg.trials - failed) << "/" << cfg.trials
            << " trial files to " << result.out_dir.string() << "\n";
  return failed == 0 ? 0 : 2;
}

int cmd_aggregate(const std::vector<std::string>& in_dirs,
                  const std::string& metric, const std::string& out_file,
                  int n_bootstrap, long seed) {
  std::vector<std::filesystem::path> dirs(in_dirs.begin(), in_dirs.end());
  const auto rows = qstab::aggregate(dirs, metric, n_bootstrap,
                                     static_cast<std::uint64_t>(seed));
  qstab::write_aggregate_csv(rows, out_file);
  std::cout << "wrote " << rows.size() << " rows to " << out_file << "\n";
  return 0;
}

int cmd_table1(const std::string& out_file, const std::string& preset,
               int trials, int buffer_len, long seed) {
  const qstab::EnvConfig env = qstab::load_preset(preset);
  const auto* sa = std::get_if<qstab::ServerAllocConfig>(&env);
  if (!sa)
    throw qstab::ConfigError("table1 expects a server-allocation preset");
  const auto rows = qstab::advantage_probe(
      *sa, trials, buffer_len, static_cast<std::uint64_t>(seed));
  qstab::write_advantage_probe_csv(rows, out_file);
  for (const auto& r : rows)
    std::printf("%-10s iqm %+.4f  ci [%+.4f, %+.4f]  trials %d\n",
                r.setting.c_str(), r.stats.iqm, r.stats.ci_low, r.stats.ci_high,
                r.stats.n_samples);
  std::cout << "wrote " << out_file << "\n";
  return 0;
}

int cmd_oracle_check(int cap, const std::string& preset) {
  const qstab::EnvConfig env = qstab::load_preset(preset);
  const auto* sa = std::get_if<qstab::ServerAllocConfig>(&env);
  if (!sa)
    throw qstab::ConfigError("oracle-check expects a server-allocation preset");
  const int n = sa->num_queues();
  const std::vector<double> ones(n, 1.0);

  struct Candidate {
    std::string name;
    qstab::ProbPolicy policy;
  };
  const std::vector<Candidate> candidates = {
      {"maxweight", qstab::deterministic_policy(
                        [sa](const qstab::State& s) {
                          return qstab::maxweight_action(s, sa->service_probs,
                                                         true);
                        },
                        n)},
      {"cmu", qstab::deterministic_policy(
                  [sa, ones](const qstab::State& s) {
                    return qstab::cmu_action(s, ones, sa->service_probs);
                  },
                  n)},
      {"serve-longest",
       qstab::deterministic_policy(qstab::serve_longest_action, n)},
      {"serve-shortest",
       qstab::deterministic_policy(qstab::serve_shortest_action, n)},
      {"random", qstab::uniform_policy(n)},
  };

  const double tol = 1e-8;
  bool all_ok = true;
  std::vector<double> j_true, j_shaped;
  std::printf("%-15s %14s %14s %12s  %s\n", "policy", "J_true",
              "J_shaped(p=2)", "|diff|", "status");
  for (const Candidate& c : candidates) {
    const qstab::TruncatedChain chain =
        qstab::build_truncated_chain(*sa, c.policy, cap);
    const double jt = qstab::stationary_average_cost(chain, std::nullopt);
    const double js = qstab::stationary_average_cost(chain, 2.0);
    const double diff = std::abs(js - jt);
    const bool ok = diff <= tol;
    all_ok = all_ok && ok;
    j_true.push_back(jt);
    j_shaped.push_back(js);
    std::printf("%-15s %14.8f %14.8f %12.3e  %s\n", c.name.c_str(), jt, js,
                diff, ok ? "pass" : "FAIL");
  }

  std::vector<int> order_true(candidates.size()), order_shaped(candidates.size());
  std::iota(order_true.begin(), order_true.end(), 0);
  order_shaped = order_true;
  std::sort(order_true.begin(), order_true.end(),
            [&](int a, int b) { return j_true[a] < j_true[b]; });
  std::sort(order_shaped.begin(), order_shaped.end(),
            [&](int a, int b) { return j_shaped[a] < j_shaped[b]; });
  const bool order_ok = order_true == order_shaped;
  all_ok = all_ok && order_ok;
  std::printf("policy ordering identical under both objectives: %s\n",
              order_ok ? "pass" : "FAIL");
  return all_ok ? 0 : 2;
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::string& values_csv) {
  std::vector<std::string> warnings;
  qstab::ExperimentConfig cfg = qstab::load_config_file(config_path, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

  std::vector<std::string> values;
  std::stringstream ss(values_csv);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(item);

  const auto results = qstab::run_sweep(cfg, param, values);
  int failed = 0;
  for (const auto& r : results) {
    failed += report_trial_failures(r);
    std::cout << "sweep output: " << r.out_dir.string() << "\n";
  }
  return failed == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"queueing-network schedulers: shaped-cost RL training, "
               "baselines, diagnostics and an exact truncated-chain oracle"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  std::string run_config, run_out;
  long run_seed = -1;
  bool run_raw = false;
  int run_workers = 0;
  run->add_option("--config", run_config, "config file")->required();
  run->add_option("--seed", run_seed, "override base seed");
  run->add_option("--out", run_out, "override output directory");
  run->add_flag("--raw", run_raw, "per-step rows instead of window means");
  run->add_option("--workers", run_workers, "trial worker threads");

  auto* agg = app.add_subcommand("aggregate",
                                 "cross-trial IQM + bootstrap CI per window");
  std::vector<std::string> agg_in;
  std::string agg_metric = "mean_true_cost", agg_out;
  int agg_boot = 2000;
  long agg_seed = 0x51A9;
  agg->add_option("--in", agg_in, "run directories")->required()->expected(-1);
  agg->add_option("--metric", agg_metric,
                  "mean_true_cost|mean_shaped_cost|destab_frac");
  agg->add_option("--out", agg_out, "output CSV")->required();
  agg->add_option("--bootstrap", agg_boot, "bootstrap resamples");
  agg->add_option("--seed", agg_seed, "bootstrap seed");

  auto* t1 = app.add_subcommand(
      "table1", "early-learning destabilizing-advantage probe");
  std::string t1_out, t1_preset = "sa-medium";
  int t1_trials = 20, t1_buffer = 128;
  long t1_seed = 1;
  t1->add_option("--out", t1_out, "output CSV")->required();
  t1->add_option("--preset", t1_preset, "server-allocation preset");
  t1->add_option("--trials", t1_trials, "trial count");
  t1->add_option("--buffer", t1_buffer, "rollout buffer length");
  t1->add_option("--seed", t1_seed, "base seed");

  auto* oc = app.add_subcommand(
      "oracle-check",
      "truncated-chain equality of shaped and true average cost");
  int oc_cap = 10;
  std::string oc_preset = "sa-medium";
  oc->add_option("--cap", oc_cap, "per-queue truncation cap");
  oc->add_option("--preset", oc_preset, "server-allocation preset");

  auto* sw = app.add_subcommand("sweep", "run once per parameter value");
  std::string sw_config, sw_param = "lyapunov_p", sw_values;
  sw->add_option("--config", sw_config, "config file")->required();
  sw->add_option("--param", sw_param, "config key to sweep");
  sw->add_option("--values", sw_values, "comma-separated values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
      return app.exit(e);
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 1;
  }

  try {
    if (run->parsed())
      return cmd_run(run_config, run_seed, run_out, run_raw, run_workers);
    if (agg->parsed())
      return cmd_aggregate(agg_in, agg_metric, agg_out, agg_boot, agg_seed);
    if (t1->parsed())
      return cmd_table1(t1_out, t1_preset, t1_trials, t1_buffer, t1_seed);
    if (oc->parsed()) return cmd_oracle_check(oc_cap, oc_preset);
    if (sw->parsed()) return cmd_sweep(sw_config, sw_param, sw_values);
  } catch (const qstab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

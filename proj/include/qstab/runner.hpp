#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qstab/config.hpp"

namespace qstab {

// Deterministic fixed-width float formatting for CSV output.
std::string csv_num(double x);

// Scheduler used for training-wheels fallbacks and the non-learning methods
// (maxweight; cmu; the cmu stand-in used for maxweight on the N-model).
std::function<Action(const State&)> make_fixed_policy(const std::string& method,
                                                      const EnvConfig& env);

struct TrialOutcome {
  int trial = 0;
  bool ok = true;
  std::string error;
};

struct RunResult {
  std::filesystem::path out_dir;
  std::vector<TrialOutcome> trials;
  bool all_ok() const {
    for (const auto& t : trials)
      if (!t.ok) return false;
    return true;
  }
};

std::filesystem::path trial_csv_path(const std::filesystem::path& dir,
                                     int trial);

// Runs one trial (seed = base_seed + trial) and writes its CSV; windowed
// columns trial,step,mean_true_cost,mean_shaped_cost,destab_frac or raw
// columns trial,step,true_cost,shaped_cost,action,destab.
TrialOutcome run_single_trial(const ExperimentConfig& cfg, int trial);

// All trials, fanned out over OpenMP workers (serial when workers == 1).
// A failed trial is recorded in trial_<k>_FAILED.txt; siblings continue.
RunResult run_experiment(const ExperimentConfig& cfg);

// One run_experiment per value, each into a sibling directory whose name is
// the base out dir suffixed with the value ("_p2" for lyapunov_p, otherwise
// "_<param><value>").
std::vector<RunResult> run_sweep(const ExperimentConfig& base,
                                 const std::string& param,
                                 const std::vector<std::string>& values);

}  // namespace qstab

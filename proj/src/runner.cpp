#include "qstab/runner.hpp"

#include <omp.h>

#include <cstdio>
#include <fstream>

#include "qstab/diagnostics.hpp"
#include "qstab/errors.hpp"
#include "qstab/parallel.hpp"

namespace qstab {

namespace fs = std::filesystem;

std::string csv_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::function<Action(const State&)> make_fixed_policy(const std::string& method,
                                                      const EnvConfig& env) {
  if (const auto* sa = std::get_if<ServerAllocConfig>(&env)) {
    if (method == "maxweight") {
      return [probs = sa->service_probs](const State& s) {
        return maxweight_action(s, probs, /*use_flags=*/true);
      };
    }
    if (method == "cmu") {
      return [probs = sa->service_probs,
              ones = std::vector<double>(sa->service_probs.size(), 1.0)](
                 const State& s) { return cmu_action(s, ones, probs); };
    }
  } else {
    const auto& nm = std::get<NModelConfig>(env);
    // server 2's rates per buffer; classical maxweight needs adaptation on
    // the N-model, so the cmu rule stands in for both names
    if (method == "maxweight" || method == "cmu") {
      return [h = nm.holding_costs,
              rates = std::vector<double>{nm.mu2, nm.mu3}](const State& s) {
        return cmu_action(s, h, rates);
      };
    }
  }
  throw ConfigError("no fixed policy named '" + method + "' for this environment");
}

namespace {

// Streams per-step records into a CSV, either raw or as window means.
class MetricsWriter {
 public:
  MetricsWriter(std::ostream& out, int trial, long window, bool raw)
      : out_(out), trial_(trial), window_(window), raw_(raw) {
    out_ << (raw_ ? "trial,step,true_cost,shaped_cost,action,destab\n"
                  : "trial,step,mean_true_cost,mean_shaped_cost,destab_frac\n");
  }

  void record(const StepRecord& rec) {
    if (raw_) {
      out_ << trial_ << ',' << rec.step << ',' << csv_num(rec.true_cost) << ','
           << csv_num(rec.shaped_cost) << ',' << rec.action << ','
           << (rec.destabilizing ? 1 : 0) << '\n';
      return;
    }
    sum_true_ += rec.true_cost;
    sum_shaped_ += rec.shaped_cost;
    destab_ += rec.destabilizing ? 1 : 0;
    ++count_;
    if (count_ == window_) flush(rec.step);
  }

  // trailing partial window (steps not divisible by window)
  void finish(long final_step) {
    if (count_ > 0) flush(final_step);
  }

 private:
  void flush(long step) {
    out_ << trial_ << ',' << step << ',' << csv_num(sum_true_ / count_) << ','
         << csv_num(sum_shaped_ / count_) << ','
         << csv_num(static_cast<double>(destab_) / count_) << '\n';
    sum_true_ = sum_shaped_ = 0.0;
    destab_ = 0;
    count_ = 0;
  }

  std::ostream& out_;
  int trial_;
  long window_;
  bool raw_;
  double sum_true_ = 0.0;
  double sum_shaped_ = 0.0;
  long destab_ = 0;
  long count_ = 0;
};

void write_visit_grid(const fs::path& path,
                      const std::vector<std::vector<long>>& grid, long total) {
  std::ofstream f(path);
  f << "q0,q1,count,frac\n";
  for (std::size_t x = 0; x < grid.size(); ++x)
    for (std::size_t y = 0; y < grid[x].size(); ++y)
      f << x << ',' << y << ',' << grid[x][y] << ','
        << csv_num(total > 0 ? static_cast<double>(grid[x][y]) / total : 0.0)
        << '\n';
}

// Non-learning methods share the never-reset loop shape of the learner.
void run_fixed_policy_trial(const ExperimentConfig& cfg, std::uint64_t seed,
                            const StepSink& sink) {
  auto env = make_environment(cfg.env);
  RandomStream env_rng(mix_seed(seed, 0));
  RandomStream agent_rng(mix_seed(seed, 1));

  std::function<Action(const State&)> policy;
  const bool random_policy = cfg.method.method == "random";
  if (!random_policy) policy = make_fixed_policy(cfg.method.method, cfg.env);

  env->reset(env_rng);
  for (long t = 1; t <= cfg.steps; ++t) {
    const State s = env->state();
    const Action a = random_policy
                         ? Action{agent_rng.uniform_int(env->num_actions())}
                         : policy(s);
    const double cost = env->step(a, env_rng);
    StepRecord rec;
    rec.step = t;
    rec.true_cost = cost;
    rec.shaped_cost = shaped_cost(s, env->state(), cost, cfg.method.shaping);
    rec.action = a.index;
    rec.destabilizing = destabilizing_action(s, a);
    rec.in_buffer = false;
    const State& next = env->state();
    rec.next_state = &next;
    if (sink) sink(rec);
  }
}

}  // namespace

fs::path trial_csv_path(const fs::path& dir, int trial) {
  char name[32];
  std::snprintf(name, sizeof(name), "trial_%03d.csv", trial);
  return dir / name;
}

TrialOutcome run_single_trial(const ExperimentConfig& cfg, int trial) {
  TrialOutcome outcome;
  outcome.trial = trial;
  const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(trial);
  const fs::path csv_path = trial_csv_path(cfg.out_dir, trial);

  try {
    std::ofstream out(csv_path);
    if (!out) throw ConfigError("cannot write " + csv_path.string());
    MetricsWriter writer(out, trial, cfg.window, cfg.raw);

    std::vector<std::vector<long>> grid;
    long grid_total = 0;
    if (cfg.visit_grid)
      grid.assign(cfg.visit_grid_max + 1,
                  std::vector<long>(cfg.visit_grid_max + 1, 0));

    StepSink sink = [&](const StepRecord& rec) {
      writer.record(rec);
      if (cfg.visit_grid && rec.next_state) {
        const State& s = *rec.next_state;
        const int x = std::min(s.queues.empty() ? 0 : s.queues[0],
                               cfg.visit_grid_max);
        const int y = std::min(s.queues.size() > 1 ? s.queues[1] : 0,
                               cfg.visit_grid_max);
        grid[x][y] += 1;
        ++grid_total;
      }
    };

    if (cfg.method.is_learner()) {
      LearnerConfig lc;
      lc.shaping = cfg.method.shaping;
      lc.transform = cfg.method.transform;
      lc.ppo = cfg.method.ppo;
      lc.training_wheels = cfg.method.method == "ppo_tw";
      lc.tw = cfg.method.tw;
      std::function<Action(const State&)> safe;
      if (lc.training_wheels) safe = make_fixed_policy("maxweight", cfg.env);
      LayerStack policy, critic;
      const bool want_ckpt = !cfg.checkpoint_out.empty();
      auto env = make_environment(cfg.env);
      train(*env, lc, cfg.steps, seed, sink, safe,
            want_ckpt ? &policy : nullptr, want_ckpt ? &critic : nullptr);
      if (want_ckpt) {
        fs::create_directories(cfg.checkpoint_out);
        char base[48];
        std::snprintf(base, sizeof(base), "trial_%03d", trial);
        save_params(policy, (fs::path(cfg.checkpoint_out) /
                             (std::string(base) + "_policy.bin")).string());
        save_params(critic, (fs::path(cfg.checkpoint_out) /
                             (std::string(base) + "_critic.bin")).string());
      }
    } else {
      run_fixed_policy_trial(cfg, seed, sink);
    }
    writer.finish(cfg.steps);
    out.flush();
    if (!out) throw ConfigError("write failed for " + csv_path.string());

    if (cfg.visit_grid) {
      char name[40];
      std::snprintf(name, sizeof(name), "trial_%03d_visits.csv", trial);
      write_visit_grid(fs::path(cfg.out_dir) / name, grid, grid_total);
    }
  } catch (const std::exception& e) {
    outcome.ok = false;
    outcome.error = e.what();
  }
  return outcome;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunResult result;
  result.out_dir = cfg.out_dir;
  fs::create_directories(result.out_dir);

  {
    std::ofstream meta(result.out_dir / "run_meta.txt");
    meta << serialize_config(cfg);
  }

  result.trials.resize(cfg.trials);
  const int workers = std::min(par::resolve_workers(cfg.workers), cfg.trials);
  if (workers <= 1) {
    for (int k = 0; k < cfg.trials; ++k)
      result.trials[k] = run_single_trial(cfg, k);
  } else {
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (int k = 0; k < cfg.trials; ++k)
      result.trials[k] = run_single_trial(cfg, k);
  }

  for (const TrialOutcome& t : result.trials) {
    if (!t.ok) {
      char name[40];
      std::snprintf(name, sizeof(name), "trial_%03d_FAILED.txt", t.trial);
      std::ofstream f(result.out_dir / name);
      f << t.error << "\n";
    }
  }
  return result;
}

std::vector<RunResult> run_sweep(const ExperimentConfig& base,
                                 const std::string& param,
                                 const std::vector<std::string>& values) {
  if (values.empty()) throw ConfigError("sweep: no values given");
  std::vector<RunResult> results;
  for (const std::string& v : values) {
    ExperimentConfig cfg = base;
    apply_override(cfg, param, v);
    const std::string suffix =
        param == "lyapunov_p" ? "_p" + v : "_" + param + v;
    cfg.out_dir = base.out_dir + suffix;
    results.push_back(run_experiment(cfg));
  }
  return results;
}

}  // namespace qstab

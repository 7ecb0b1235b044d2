#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qstab/arppo.hpp"
#include "qstab/presets.hpp"

namespace qstab {

// Everything a trial needs besides the environment: the acting/learning
// method and its knobs.
struct MethodConfig {
  std::string method = "stop";  // ppo|stop|maxweight|cmu|random|ppo_tw
  ShapingSpec shaping;
  TransformKind transform = TransformKind::symloge;
  PpoHyper ppo;
  TrainingWheels tw;

  bool is_learner() const {
    return method == "ppo" || method == "stop" || method == "ppo_tw";
  }
};

struct ExperimentConfig {
  EnvConfig env;
  std::string env_label = "sa-medium";  // preset name or "custom"
  MethodConfig method;
  long steps = 100000;
  int trials = 20;
  std::uint64_t base_seed = 1;
  std::string out_dir = "out";
  long window = 1000;
  bool raw = false;    // per-step rows instead of windowed means
  int workers = 0;     // 0 = hardware parallelism
  bool visit_grid = false;
  int visit_grid_max = 50;
  std::string checkpoint_out;  // directory for final net parameters, optional

  void validate() const;  // throws ConfigError
};

// key = value lines; '#' comments; [section] headers are permitted and
// ignored (keys are globally unique). Unknown keys are errors.
std::map<std::string, std::string> parse_key_values(const std::string& text);

// `warnings` collects non-fatal advice (e.g. the p = 1 dilution note).
ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv,
                                 std::vector<std::string>* warnings = nullptr);
ExperimentConfig load_config_file(const std::string& path,
                                  std::vector<std::string>* warnings = nullptr);

// Re-applies a single key on top of an existing config (sweep support).
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

// Round-trip: emits the resolved config in the same key = value format.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace qstab

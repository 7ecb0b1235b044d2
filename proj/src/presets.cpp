#include "qstab/presets.hpp"

#include "qstab/errors.hpp"

namespace qstab {

EnvConfig load_preset(const std::string& name) {
  if (name == "sa-medium") {
    ServerAllocConfig c;
    c.arrival_rates = {0.2, 0.1};
    c.service_probs = {0.3, 0.8};
    c.connect_probs = {1.0, 1.0};
    return c;
  }
  if (name == "sa-high-faulty") {
    ServerAllocConfig c;
    c.arrival_rates = {0.2, 0.1};
    c.service_probs = {0.3, 0.8};
    c.connect_probs = {0.95, 0.5};
    return c;
  }
  if (name == "sa-veryhigh-faulty") {
    ServerAllocConfig c;
    c.arrival_rates = {0.2, 0.1};
    c.service_probs = {0.3, 0.8};
    c.connect_probs = {0.7, 0.5};
    return c;
  }
  if (name == "sa-10queue") {
    ServerAllocConfig c;
    c.arrival_rates = {0.05, 0.01, 0.2, 0.4, 0.05, 0.01, 0.02, 0.01, 0.015, 0.01};
    c.service_probs = {0.9, 0.85, 0.95, 0.75, 0.9, 0.9, 0.85, 0.9, 0.9, 0.85};
    c.connect_probs = std::vector<double>(10, 1.0);
    return c;
  }
  if (name == "nmodel-veryhigh-2") {
    NModelConfig c;
    c.lambda1 = 0.9;
    c.lambda2 = 0.8;
    c.mu1 = 1.0;
    c.mu2 = 0.9;
    c.mu3 = 0.8;
    return c;
  }
  throw ConfigError("unknown preset: " + name);
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "sa-medium", "sa-high-faulty", "sa-veryhigh-faulty", "sa-10queue",
      "nmodel-veryhigh-2"};
  return names;
}

}  // namespace qstab
